#ifndef LQSPECTRA_IFS_HPP
#define LQSPECTRA_IFS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "lqspectra/geometry.hpp"
#include "lqspectra/measure.hpp"

namespace lqs {

// Chart pair used to conjugate a planar system onto a manifold:
// S = lift o f o project.  Implementations (stereographic charts) live in
// manifolds.hpp.
class ConjugationChart {
public:
  virtual ~ConjugationChart() = default;
  virtual Vec project(std::span<const double> manifold_pt) const = 0;  // manifold -> plane
  virtual Vec lift(std::span<const double> plane_pt) const = 0;        // plane -> manifold
  virtual double project_scale(std::span<const double> manifold_pt) const = 0;
  virtual double lift_scale(std::span<const double> plane_pt) const = 0;
  virtual bool project_in_domain(std::span<const double> manifold_pt) const = 0;
  virtual bool lift_in_domain(std::span<const double> plane_pt) const = 0;
  virtual Space manifold_space() const = 0;
  virtual Space plane_space() const = 0;
};

// A contracting conformal map: either a Euclidean similarity
// x |-> ratio * R * x + shift with R orthogonal and ratio in (0,1), or a
// chart conjugation of one.  Conjugated maps are evaluated as
// lift o planar o project at runtime rather than symbolically composed.
class ConformalMap {
public:
  static ConformalMap similarity(double ratio, std::vector<double> rotation, Vec shift,
                                 double gamma = 0.5);
  static ConformalMap conjugated(ConformalMap planar_base,
                                 std::shared_ptr<const ConjugationChart> chart,
                                 double lift_scale_bound, double project_scale_bound);

  bool is_conjugated() const { return static_cast<bool>(chart_); }
  int plane_dim() const;

  Vec apply(std::span<const double> x) const;
  Vec apply_inverse(std::span<const double> y) const;
  Vec fixed_point() const;

  // Upper bound on the Lipschitz constant over the region of use.
  double lipschitz_bound() const;
  // Conformal derivative norm |S'(x)|.
  double local_scale(std::span<const double> x) const;
  // |det S'(x)| = |S'(x)|^n with n the intrinsic dimension.
  double det_abs(std::span<const double> x) const;

  double gamma() const { return gamma_; }
  double similarity_ratio() const;
  // The affine payload of a conjugated map, as a plain planar similarity.
  ConformalMap planar_base() const;
  const std::shared_ptr<const ConjugationChart>& chart() const { return chart_; }

  // a.compose_with(b) is the map x |-> a(b(x)).  Both maps must be plain
  // similarities or share the same conjugation chart.
  ConformalMap compose_with(const ConformalMap& other) const;

  static ConformalMap identity(int dim);

private:
  ConformalMap() = default;
  Vec apply_affine(std::span<const double> x) const;

  double ratio_ = 1.0;
  std::vector<double> rot_;  // row-major dim x dim, orthogonal
  Vec shift_;
  int dim_ = 0;
  double gamma_ = 0.5;
  std::shared_ptr<const ConjugationChart> chart_;
  double lift_scale_bound_ = 1.0;
  double project_scale_bound_ = 1.0;
};

// Finite word over the map alphabet with its cached composed map, weight
// p_u and diameter bound.
struct Word {
  std::vector<std::uint8_t> symbols;
  double prob = 1.0;
  double diam_bound = 0.0;
  ConformalMap map = ConformalMap::identity(1);
};

struct CutSet {
  double threshold = 0.0;  // words satisfy diam_bound <= threshold < parent bound
  std::vector<Word> words;
};

struct DistortionConstants {
  double d1 = 1.0;
  double d2 = 1.0;
  double d3 = 1.0;
  double lambda_min = 0.0;  // min |det S'_i(x)| over maps and probe points
};

// A conformal iterated function system with its probability vector, the
// space it acts on, and the seed ball the maps keep invariant.
class IFSSpec {
public:
  static IFSSpec create(std::vector<ConformalMap> maps, std::vector<double> probs, Space space,
                        Ball seed, std::uint64_t word_budget = 2'000'000);

  int map_count() const { return static_cast<int>(maps_.size()); }
  const ConformalMap& map(int i) const { return maps_[static_cast<std::size_t>(i)]; }
  double prob(int i) const { return probs_[static_cast<std::size_t>(i)]; }
  std::span<const double> probs() const { return probs_; }
  const Space& space() const { return space_; }
  const Ball& seed() const { return seed_; }
  std::uint64_t word_budget() const { return word_budget_; }

  // Attractor diameter estimated from a depth-8 orbit cloud of the anchor.
  double attractor_diameter() const { return attractor_diameter_; }
  // Fixed point of the first map; always in the attractor.
  const Vec& anchor() const { return anchor_; }

  Word root_word() const;

  IFSSpec with_budget(std::uint64_t budget) const;

private:
  IFSSpec() = default;

  std::vector<ConformalMap> maps_;
  std::vector<double> probs_;
  Space space_ = Space::euclidean(1);
  Ball seed_;
  std::uint64_t word_budget_ = 2'000'000;
  double attractor_diameter_ = 0.0;
  Vec anchor_;
};

// The word u extended by one symbol: S_{u i} = S_u o S_i, weight and
// diameter bound updated multiplicatively.
Word compose(const IFSSpec& spec, const Word& u, int symbol);

// Words pruned at the first generation whose diameter bound drops to the
// threshold.  The empty word is never a member.  Throws ResourceError
// carrying the deepest dyadic level that fits when the budget would be
// exceeded.
CutSet cut_set_threshold(const IFSSpec& spec, double threshold);
CutSet cut_set(const IFSSpec& spec, int t);  // threshold 2^-t

struct AtomizeResult {
  AtomicMeasure measure;
  CutSet cut;
  // atom id -> index into cut.words; empty when duplicate positions merged.
  std::vector<std::uint32_t> atom_word;
  bool merged = false;
};

// One atom per cut word at threshold delta_atom: position S_u(anchor),
// mass p_u.  Atoms at identical positions accumulate mass.
AtomicMeasure attractor_atoms(const IFSSpec& spec, double delta_atom);
AtomizeResult attractor_atoms_detailed(const IFSSpec& spec, double delta_atom);

// Empirical distortion constants from sampled words and point pairs;
// reported values are lower bounds on the true constants.  Exact
// D1 = D2 = 1 for pure-similarity systems in Euclidean space.
DistortionConstants distortion_constants(const IFSSpec& spec, int probe_count);

// Deterministic sampler used by the seed-containment checks and the
// distortion probes.
Vec sample_point_in_ball(const Space& space, const Ball& ball, std::uint64_t& rng_state);

}  // namespace lqs

#endif
