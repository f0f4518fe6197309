#ifndef LQSPECTRA_MEASURE_HPP
#define LQSPECTRA_MEASURE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "lqspectra/geometry.hpp"

namespace lqs {

// A ball-mass answer with its shell bookkeeping: `shell_bound` is the total
// mass sitting within `resolution` of the ball boundary.  The atomic value
// is exact for the atomic measure; against the target measure it is off by
// at most the shell mass.
struct BallMass {
  double value = 0.0;
  double shell_bound = 0.0;
};

struct DoublingConstantEstimate {
  double c_hat = 1.0;
  std::vector<double> scales;
  std::vector<double> per_scale;  // max ratio mu(B_2r)/mu(B_r) at each scale
  Vec worst_center;
  double worst_scale = 0.0;
};

// Finite weighted point cloud approximating a target measure at positional
// resolution `resolution`.  Immutable after construction; all queries are
// pure and safe for concurrent readers.
class AtomicMeasure {
public:
  // Validates positive masses.  cell_width <= 0 picks a default bucket
  // width from the support extent; pass the dominant query radius to tune.
  static AtomicMeasure create(Space space, PointSet positions, std::vector<double> masses,
                              double resolution, double cell_width = 0.0);

  std::size_t size() const { return masses_.size(); }
  const Space& space() const { return space_; }
  double resolution() const { return resolution_; }
  double total_mass() const { return total_mass_; }
  double mass(std::size_t i) const { return masses_[i]; }
  std::span<const double> masses() const { return masses_; }
  std::span<const double> position(std::size_t i) const { return positions_[i]; }
  const PointSet& positions() const { return positions_; }
  const SpatialIndex& index() const { return index_; }
  double support_diameter() const { return support_diameter_; }
  // Smallest ball radius the estimators accept (keeps shell error subdominant).
  double scale_floor() const { return 4.0 * resolution_; }

  // Mass of the closed ball B_r(x).  An atom exactly at distance r counts.
  double ball_mass(std::span<const double> x, double r) const;
  BallMass ball_mass_with_error(std::span<const double> x, double r) const;

  // Discretized generalized-dimension integrand:
  //   sum_a m_a * ball_mass(a, delta)^(q-1).
  // q = 1 is a DomainError (entropy handles that exponent); delta below the
  // scale floor is a DomainError.
  double lq_sum(double delta, double q) const;
  BallMass lq_sum_with_error(double delta, double q) const;

  // Max of mu(B_2r(x))/mu(B_r(x)) over probed atoms and the given scales; a
  // lower bound on any true doubling constant of the target measure up to
  // shell error.
  DoublingConstantEstimate doubling_constant(std::span<const double> scales, int probes) const;

  // Atom positions mapped through f, masses preserved.  Resolution grows by
  // the map's expansion bound.  Throws DomainError naming the first atom
  // outside the map's domain.
  AtomicMeasure pushforward(const PointMap& f) const;

  // Same measure, new bucket width.
  AtomicMeasure reindexed(double cell_width) const;

private:
  AtomicMeasure(Space space, PointSet positions, std::vector<double> masses, double resolution,
                double cell_width, double support_diameter);

  Space space_;
  PointSet positions_;
  std::vector<double> masses_;
  double resolution_;
  double total_mass_;
  double support_diameter_;
  SpatialIndex index_;
};

}  // namespace lqs

#endif
