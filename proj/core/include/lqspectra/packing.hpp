#ifndef LQSPECTRA_PACKING_HPP
#define LQSPECTRA_PACKING_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lqspectra/ifs.hpp"
#include "lqspectra/measure.hpp"

namespace lqs {

// Disjoint closed delta-balls with centers on support atoms, kept in greedy
// construction order (the order carries the heaviness certificate).
struct Packing {
  std::vector<std::uint32_t> center_ids;
  double radius = 0.0;
  bool maximal = false;
  bool heavy = false;
};

// Greedy heavy maximal packing: at each step pick, among atoms outside the
// previous double balls, one whose delta-ball mass is within factor 2 of
// the maximum (the exact argmax deterministically; a seeded draw from the
// near-argmax candidates when rng_seed is given), then exclude its
// 2*delta-ball.  Ties break to the lowest atom id.
Packing heavy_maximal_packing(const AtomicMeasure& mu, double delta);
Packing heavy_maximal_packing_randomized(const AtomicMeasure& mu, double delta,
                                         std::uint64_t rng_seed);

// Same constructions with the atom ball masses supplied (they are scale-
// but not construction-dependent, so batch callers share them).
Packing heavy_maximal_packing(const AtomicMeasure& mu, double delta,
                              std::span<const double> ball_masses);
Packing heavy_maximal_packing_randomized(const AtomicMeasure& mu, double delta,
                                         std::span<const double> ball_masses,
                                         std::uint64_t rng_seed);

// Maximal (not necessarily heavy) packing from a first-fit sweep over a
// seeded shuffle of the atom ids.
Packing random_maximal_packing(const AtomicMeasure& mu, double delta, std::uint64_t rng_seed);

// Partition of the support atoms generated by a maximal packing: an atom in
// some B_delta(x_j) joins cell j; otherwise it joins the first center (in
// packing order) whose 2*delta-ball contains it.
struct MaximalPartition {
  std::vector<std::uint32_t> center_ids;
  double delta = 0.0;
  std::vector<std::uint32_t> cell_of_atom;
  std::vector<std::vector<std::uint32_t>> cells;  // ascending atom ids per cell
  // 1 when the atom entered through the inner delta-ball, 0 via the
  // annulus rule; this is the E vs F provenance of each member.
  std::vector<std::uint8_t> via_core;
};

MaximalPartition maximal_partition(const Packing& packing, const AtomicMeasure& mu);

// (lambda, delta)-grid: cells contain their center's lambda*delta-ball and
// sit inside its delta-ball.  Centers form a first-fit maximal
// lambda*delta-packing; atoms join their nearest center (ties to the
// lowest center index).
struct GridPartition {
  double lambda = 0.0;
  double delta = 0.0;
  std::vector<std::uint32_t> center_ids;
  std::vector<std::uint32_t> cell_of_atom;
  std::vector<std::vector<std::uint32_t>> cells;
};

GridPartition grid_partition(const AtomicMeasure& mu, double lambda, double delta);

// Borel cover pulled back through a cut word: cell j collects the atoms a
// with S_u(pos_a) landing in partition cell j.  Q and D are measured on the
// result and certified against the caps.
struct GoodCover {
  std::vector<std::vector<std::uint32_t>> cells;
  double q_factor = 0.0;  // certified: max cell diameter / delta
  double delta = 0.0;
  int d_bound = 0;  // certified: max number of cells any delta-ball meets
};

GoodCover pullback_good_cover(const MaximalPartition& fine, const Word& u,
                              const AtomicMeasure& mu, double delta, double q_cap, int d_cap);

struct CheckResult {
  std::string name;
  bool pass = true;
  std::string witness;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

VerifyReport verify(const Packing& packing, const AtomicMeasure& mu);
VerifyReport verify(const MaximalPartition& part, const AtomicMeasure& mu);
VerifyReport verify(const GridPartition& grid, const AtomicMeasure& mu);
VerifyReport verify(const GoodCover& cover, const AtomicMeasure& mu);

// Ball masses at every atom, id-aligned; shared by the greedy
// constructions and the spectrum sums.
std::vector<double> atom_ball_masses(const AtomicMeasure& mu, double delta);

}  // namespace lqs

#endif
