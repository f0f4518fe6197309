#include "lqspectra/measure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lqs {

namespace {

double estimate_diameter(const Space& space, const PointSet& pts) {
  std::size_t n = pts.size();
  if (n < 2) return 0.0;
  std::size_t stride = 1;
  const std::size_t cap = 2048;
  if (n > cap) stride = (n + cap - 1) / cap;
  double best = 0.0;
  for (std::size_t i = 0; i < n; i += stride)
    for (std::size_t j = i + stride; j < n; j += stride)
      best = std::max(best, space.distance(pts[i], pts[j]));
  return best;
}

}  // namespace

AtomicMeasure AtomicMeasure::create(Space space, PointSet positions, std::vector<double> masses,
                                    double resolution, double cell_width) {
  if (positions.size() != masses.size())
    throw DomainError("atom position and mass counts differ");
  if (positions.size() == 0) throw DomainError("atomic measure needs at least one atom");
  if (!(resolution >= 0.0)) throw DomainError("resolution must be nonnegative");
  for (double m : masses)
    if (!(m > 0.0)) throw DomainError("atom masses must be positive");

  double diam = estimate_diameter(space, positions);
  if (cell_width <= 0.0) {
    cell_width = diam > 0.0 ? diam / 64.0 : std::max(resolution * 8.0, 1.0);
  }
  return AtomicMeasure(std::move(space), std::move(positions), std::move(masses), resolution,
                       cell_width, diam);
}

AtomicMeasure::AtomicMeasure(Space space, PointSet positions, std::vector<double> masses,
                             double resolution, double cell_width, double support_diameter)
    : space_(space),
      positions_(std::move(positions)),
      masses_(std::move(masses)),
      resolution_(resolution),
      total_mass_(0.0),
      support_diameter_(support_diameter),
      index_(space, positions_, cell_width) {
  for (double m : masses_) total_mass_ += m;
}

double AtomicMeasure::ball_mass(std::span<const double> x, double r) const {
  if (!(r > 0.0)) throw DomainError("ball radius must be positive");
  return index_.ball_mass_sum(x, r, masses_);
}

BallMass AtomicMeasure::ball_mass_with_error(std::span<const double> x, double r) const {
  if (!(r > 0.0)) throw DomainError("ball radius must be positive");
  BallMass out;
  double shell_lo = r - resolution_;
  index_.for_each_in_range(x, r + resolution_, [&](std::uint32_t id, double d) {
    if (d <= r) out.value += masses_[id];
    if (d >= shell_lo) out.shell_bound += masses_[id];
  });
  return out;
}

double AtomicMeasure::lq_sum(double delta, double q) const {
  return lq_sum_with_error(delta, q).value;
}

BallMass AtomicMeasure::lq_sum_with_error(double delta, double q) const {
  if (q == 1.0)
    throw DomainError("lq_sum is undefined at q = 1; use the entropy estimators instead");
  if (delta < scale_floor())
    throw DomainError("delta " + std::to_string(delta) + " is below the scale floor " +
                      std::to_string(scale_floor()));
  BallMass out;
  for (std::size_t a = 0; a < size(); ++a) {
    BallMass bm = ball_mass_with_error(position(a), delta);
    out.value += masses_[a] * std::pow(bm.value, q - 1.0);
    out.shell_bound += masses_[a] * bm.shell_bound;
  }
  return out;
}

DoublingConstantEstimate AtomicMeasure::doubling_constant(std::span<const double> scales,
                                                          int probes) const {
  if (scales.empty()) throw DomainError("doubling constant needs at least one scale");
  for (double r : scales) {
    if (r < scale_floor())
      throw DomainError("doubling scale below the scale floor");
    if (support_diameter_ > 0.0 && r > support_diameter_)
      throw DomainError("doubling scale exceeds the support diameter");
  }

  std::size_t n = size();
  std::size_t stride = 1;
  if (probes > 0 && n > static_cast<std::size_t>(probes)) stride = (n + probes - 1) / probes;

  DoublingConstantEstimate est;
  est.scales.assign(scales.begin(), scales.end());
  est.c_hat = 1.0;
  for (double r : est.scales) {
    double scale_worst = 1.0;
    for (std::size_t a = 0; a < n; a += stride) {
      double inner = ball_mass(position(a), r);
      double outer = ball_mass(position(a), 2.0 * r);
      double ratio = outer / inner;  // inner >= own atom mass > 0
      if (ratio > scale_worst) scale_worst = ratio;
      if (ratio > est.c_hat) {
        est.c_hat = ratio;
        est.worst_center.assign(position(a).begin(), position(a).end());
        est.worst_scale = r;
      }
    }
    est.per_scale.push_back(scale_worst);
  }
  return est;
}

AtomicMeasure AtomicMeasure::pushforward(const PointMap& f) const {
  Space target = f.target_space();
  std::vector<double> coords;
  coords.reserve(size() * static_cast<std::size_t>(target.ambient_dim()));
  for (std::size_t a = 0; a < size(); ++a) {
    auto p = position(a);
    if (!f.in_domain(p))
      throw DomainError("atom " + std::to_string(a) + " is outside the domain of map '" +
                        f.name() + "'");
    Vec q = f.apply(p);
    coords.insert(coords.end(), q.begin(), q.end());
  }
  PointSet pts(std::move(coords), target.ambient_dim());
  return AtomicMeasure::create(target, std::move(pts), masses_,
                               resolution_ * f.expansion_bound());
}

AtomicMeasure AtomicMeasure::reindexed(double cell_width) const {
  return AtomicMeasure(space_, positions_, masses_, resolution_, cell_width, support_diameter_);
}

}  // namespace lqs
