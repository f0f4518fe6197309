#ifndef LQSPECTRA_GEOMETRY_HPP
#define LQSPECTRA_GEOMETRY_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lqspectra/errors.hpp"

namespace lqs {

using Vec = std::vector<double>;

class PointMap;

// Metric space the measures live on.  Euclidean(n) uses the L2 metric on
// R^n.  SphereGeodesic(n) stores points as unit vectors in R^{n+1} and uses
// the great-circle metric.  Chart wraps an inner space behind a coordinate
// map: d(x, y) = d_inner(f(x), f(y)).
class Space {
public:
  enum class Kind { Euclidean, SphereGeodesic, Chart };

  static Space euclidean(int n);
  static Space sphere_geodesic(int n);
  static Space chart(Space inner, std::shared_ptr<const PointMap> to_inner);

  Kind kind() const { return kind_; }
  // Dimension of the coordinate tuples handled by this space.
  int ambient_dim() const { return ambient_dim_; }
  // Dimension of the space itself (n for both Euclidean(n) and S^n).
  int intrinsic_dim() const { return intrinsic_dim_; }

  double distance(std::span<const double> x, std::span<const double> y) const;
  // Throws DomainError when a point is not valid for this space
  // (wrong arity, non-unit sphere point beyond tolerance).
  void validate_point(std::span<const double> x) const;

  bool same_kind(const Space& other) const {
    return kind_ == other.kind_ && ambient_dim_ == other.ambient_dim_;
  }

  std::string describe() const;

private:
  Space(Kind k, int ambient, int intrinsic) : kind_(k), ambient_dim_(ambient), intrinsic_dim_(intrinsic) {}

  Kind kind_;
  int ambient_dim_;
  int intrinsic_dim_;
  std::shared_ptr<const Space> inner_;
  std::shared_ptr<const PointMap> to_inner_;
};

// A differentiable coordinate map between spaces.  Implementations live in
// manifolds.hpp (stereographic charts); IdentityMap below covers tests and
// trivial pushforwards.
class PointMap {
public:
  virtual ~PointMap() = default;
  virtual Vec apply(std::span<const double> x) const = 0;
  virtual bool in_domain(std::span<const double> x) const = 0;
  // Upper bound on the local Lipschitz constant over the domain of use;
  // pushforwards scale their positional resolution by this factor.
  virtual double expansion_bound() const = 0;
  virtual Space target_space() const = 0;
  virtual std::string name() const = 0;
};

class IdentityMap final : public PointMap {
public:
  explicit IdentityMap(Space space) : space_(space) {}
  Vec apply(std::span<const double> x) const override { return Vec(x.begin(), x.end()); }
  bool in_domain(std::span<const double>) const override { return true; }
  double expansion_bound() const override { return 1.0; }
  Space target_space() const override { return space_; }
  std::string name() const override { return "identity"; }

private:
  Space space_;
};

struct Ball {
  Vec center;
  double radius = 0.0;
};

// Validates radius > 0.
Ball make_ball(Vec center, double radius);

// Immutable flat point storage (count x dim, row major).
class PointSet {
public:
  PointSet() : dim_(0) {}
  PointSet(std::vector<double> coords, int dim);

  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  int dim() const { return dim_; }
  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  const std::vector<double>& raw() const { return coords_; }

private:
  std::vector<double> coords_;
  int dim_;
};

// Uniform bucket grid over ambient coordinates of an immutable point set.
// For sphere spaces buckets are laid in the ambient embedding and the chord
// radius prefilters candidates; the exact geodesic test runs afterwards
// (chord distance never exceeds geodesic distance, so no point is missed).
// Spaces with ambient dimension above 4, and Chart spaces, fall back to a
// linear scan.
class SpatialIndex {
public:
  SpatialIndex(Space space, const PointSet& points, double cell_width);

  // Ids of all points p with distance(x, p) <= r, ascending.  r <= 0 is a
  // DomainError.
  std::vector<std::uint32_t> range_query(std::span<const double> x, double r) const;

  double ball_mass_sum(std::span<const double> x, double r, std::span<const double> weights) const;

  // Sum of weights over the shell |d(x,p) - r| <= half_width.
  double shell_sum(std::span<const double> x, double r, double half_width,
                   std::span<const double> weights) const;

  double cell_width() const { return cell_width_; }
  std::size_t size() const { return count_; }
  const Space& space() const { return space_; }
  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }

  template <class F>
  void for_each_in_range(std::span<const double> x, double r, F&& fn) const {
    if (r <= 0.0) throw DomainError("range query radius must be positive");
    if (!gridded_) {
      for (std::uint32_t i = 0; i < count_; ++i) {
        double d = space_.distance(x, point(i));
        if (d <= r) fn(i, d);
      }
      return;
    }
    const double box_r = box_radius(r);
    std::array<std::int64_t, kMaxGridDim> lo{}, hi{};
    for (int a = 0; a < dim_; ++a) {
      lo[a] = cell_coord(x[a] - box_r);
      hi[a] = cell_coord(x[a] + box_r);
    }
    std::array<std::int64_t, kMaxGridDim> cur = lo;
    while (true) {
      auto [begin, end] = cell_range(cur);
      for (std::size_t k = begin; k < end; ++k) {
        std::uint32_t id = cell_ids_[k];
        double d = space_.distance(x, point(id));
        if (d <= r) fn(id, d);
      }
      int axis = 0;
      while (axis < dim_ && cur[axis] == hi[axis]) {
        cur[axis] = lo[axis];
        ++axis;
      }
      if (axis == dim_) break;
      ++cur[axis];
    }
  }

private:
  static constexpr int kMaxGridDim = 4;

  double box_radius(double r) const;
  std::int64_t cell_coord(double v) const;
  std::pair<std::size_t, std::size_t> cell_range(const std::array<std::int64_t, kMaxGridDim>& c) const;

  Space space_;
  std::vector<double> coords_;
  int dim_;
  std::uint32_t count_;
  double cell_width_;
  bool gridded_;
  // CSR layout: cell_keys_ sorted, cell_offsets_[i]..cell_offsets_[i+1] index into cell_ids_.
  std::vector<std::array<std::int64_t, kMaxGridDim>> cell_keys_;
  std::vector<std::size_t> cell_offsets_;
  std::vector<std::uint32_t> cell_ids_;
};

// Greedy-net upper bound on the number of r-balls needed to cover
// sample /\ B_R(x), maximized over probe centers drawn from the sample.
// max_probes limits the probe centers (strided deterministically).
int covering_probe(const Space& space, const PointSet& sample, double R, double r,
                   int max_probes = 256);

struct DoublingProbe {
  int n0_hat = 1;             // max observed r-ball count covering a 2r-ball
  double d0_hat = 1.0;        // fitted covering-law constants:
  double p_hat = 0.0;         //   count(R, r) <= d0_hat * (R/r)^p_hat
  std::vector<double> scales; // the r values probed
  std::vector<int> counts_2r; // covering counts at (R=2r, r), aligned with scales
};

// Probes the covering law over the given radii: for each r the 2r-ball
// covering count feeds n0_hat, and counts for a fixed large R across the
// radii feed the (d0_hat, p_hat) fit.
DoublingProbe estimate_doubling(const Space& space, const PointSet& sample,
                                std::span<const double> radii, int max_probes = 256);

}  // namespace lqs

#endif
