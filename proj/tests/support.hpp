#ifndef LQSPECTRA_TESTS_SUPPORT_HPP
#define LQSPECTRA_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "lqspectra/entropy.hpp"
#include "lqspectra/ifs.hpp"
#include "lqspectra/manifolds.hpp"
#include "lqspectra/measure.hpp"
#include "lqspectra/packing.hpp"
#include "lqspectra/spectra.hpp"

namespace testsup {

using namespace lqs;

// Middle-thirds system on [0, 1].
inline IFSSpec cantor(double p1 = 0.5) {
  std::vector<ConformalMap> maps{
      ConformalMap::similarity(1.0 / 3.0, {}, {0.0}),
      ConformalMap::similarity(1.0 / 3.0, {}, {2.0 / 3.0}),
  };
  return IFSSpec::create(std::move(maps), {p1, 1.0 - p1}, Space::euclidean(1),
                         make_ball({0.5}, 0.5));
}

// Full-interval system: the invariant measure is Lebesgue on [0, 1].
inline IFSSpec uniform_half() {
  std::vector<ConformalMap> maps{
      ConformalMap::similarity(0.5, {}, {0.0}),
      ConformalMap::similarity(0.5, {}, {0.5}),
  };
  return IFSSpec::create(std::move(maps), {0.5, 0.5}, Space::euclidean(1), make_ball({0.5}, 0.5));
}

// Two tight clusters near 0 and 1.
inline IFSSpec two_cluster(double p1 = 0.3) {
  std::vector<ConformalMap> maps{
      ConformalMap::similarity(1.0 / 8.0, {}, {0.0}),
      ConformalMap::similarity(1.0 / 8.0, {}, {7.0 / 8.0}),
  };
  return IFSSpec::create(std::move(maps), {p1, 1.0 - p1}, Space::euclidean(1),
                         make_ball({0.5}, 0.5));
}

// Middle-thirds Cantor set on the segment [-0.2, 0.2] x {0} of the disk.
inline IFSSpec disk_cantor() {
  std::vector<ConformalMap> maps{
      ConformalMap::similarity(1.0 / 3.0, {}, {-2.0 / 15.0, 0.0}),
      ConformalMap::similarity(1.0 / 3.0, {}, {2.0 / 15.0, 0.0}),
  };
  return IFSSpec::create(std::move(maps), {0.5, 0.5}, Space::euclidean(2),
                         make_ball({0.0, 0.0}, 0.2));
}

inline AtomicMeasure point_masses(Space space, std::vector<Vec> points, std::vector<double> masses,
                                  double resolution) {
  std::vector<double> coords;
  int dim = static_cast<int>(points.front().size());
  for (const Vec& p : points) coords.insert(coords.end(), p.begin(), p.end());
  return AtomicMeasure::create(std::move(space), PointSet(std::move(coords), dim),
                               std::move(masses), resolution);
}

// Oracle: plain linear scan, independent of the bucket grid.
inline std::vector<std::uint32_t> linear_scan_query(const Space& space, const PointSet& pts,
                                                    std::span<const double> x, double r) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < pts.size(); ++i)
    if (space.distance(x, pts[i]) <= r) out.push_back(i);
  return out;
}

// Oracle: O(N^2) correlation sum  sum_a sum_b m_a m_b [d(a,b) <= delta].
inline double brute_correlation_sum(const AtomicMeasure& mu, double delta) {
  double s = 0.0;
  for (std::size_t a = 0; a < mu.size(); ++a)
    for (std::size_t b = 0; b < mu.size(); ++b)
      if (mu.space().distance(mu.position(a), mu.position(b)) <= delta)
        s += mu.mass(a) * mu.mass(b);
  return s;
}

// Oracle: exact bracketing of the middle-thirds measure of a closed
// interval [a, b], recursing to `depth` generations.  Returns {lower,
// upper} bounds on mu([a, b]).
inline std::pair<double, double> cantor_interval_mass(double a, double b, double p1, int depth,
                                                      double cell_lo = 0.0, double cell_w = 1.0,
                                                      double weight = 1.0) {
  double cell_hi = cell_lo + cell_w;
  if (cell_hi < a || cell_lo > b) return {0.0, 0.0};
  if (cell_lo >= a && cell_hi <= b) return {weight, weight};
  if (depth == 0) return {0.0, weight};
  auto left = cantor_interval_mass(a, b, p1, depth - 1, cell_lo, cell_w / 3.0, weight * p1);
  auto right = cantor_interval_mass(a, b, p1, depth - 1, cell_lo + 2.0 * cell_w / 3.0, cell_w / 3.0,
                                    weight * (1.0 - p1));
  return {left.first + right.first, left.second + right.second};
}

inline double ls_slope(std::span<const double> xs, std::span<const double> ys) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  return sxy / sxx;
}

// Non-doubling diagnostic measure: geometric positions with
// super-geometrically decaying masses, so the doubling ratios climb without
// bound toward small scales.
inline AtomicMeasure nondoubling_measure() {
  std::vector<Vec> pts;
  std::vector<double> masses;
  double total = 0.0;
  for (int k = 0; k <= 16; ++k) {
    pts.push_back({std::pow(2.0, -k)});
    masses.push_back(std::pow(2.0, -(k * k) / 2.0));
    total += masses.back();
  }
  for (double& m : masses) m /= total;
  return point_masses(Space::euclidean(1), std::move(pts), std::move(masses), 1e-7);
}

inline double hausdorff_distance(const AtomicMeasure& a, const AtomicMeasure& b) {
  auto one_sided = [](const AtomicMeasure& from, const AtomicMeasure& to) {
    double worst = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) {
      double best = 1e300;
      for (std::size_t j = 0; j < to.size(); ++j)
        best = std::min(best, from.space().distance(from.position(i), to.position(j)));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_sided(a, b), one_sided(b, a));
}

}  // namespace testsup

#endif
