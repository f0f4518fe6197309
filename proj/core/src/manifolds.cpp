#include "lqspectra/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lqs {

namespace {

double sq_norm(std::span<const double> v, std::size_t count) {
  double s = 0.0;
  for (std::size_t i = 0; i < count; ++i) s += v[i] * v[i];
  return s;
}

}  // namespace

StereographicChart::StereographicChart(int sphere_dim) : n_(sphere_dim) {
  if (n_ < 1) throw DomainError("sphere dimension must be positive");
}

bool StereographicChart::project_in_domain(std::span<const double> p) const {
  return static_cast<int>(p.size()) == n_ + 1 && p[n_] < 0.0;
}

bool StereographicChart::lift_in_domain(std::span<const double> u) const {
  return static_cast<int>(u.size()) == n_ && sq_norm(u, u.size()) < 1.0;
}

Vec StereographicChart::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_ + 1)
    throw DomainError("stereographic forward input has wrong arity");
  if (!(x[n_] < 0.0))
    throw DomainError("stereographic forward input must lie on the open lower hemisphere");
  double f = 1.0 / (1.0 - x[n_]);
  Vec u(n_);
  for (int i = 0; i < n_; ++i) u[i] = f * x[i];
  return u;
}

Vec StereographicChart::inverse(std::span<const double> u) const {
  if (static_cast<int>(u.size()) != n_)
    throw DomainError("stereographic inverse input has wrong arity");
  double s = sq_norm(u, u.size());
  if (!(s < 1.0)) throw DomainError("stereographic inverse input must lie in the open unit disk");
  double f = 1.0 / (s + 1.0);
  Vec x(n_ + 1);
  for (int i = 0; i < n_; ++i) x[i] = 2.0 * f * u[i];
  x[n_] = (s - 1.0) * f;
  return x;
}

double StereographicChart::forward_scale(std::span<const double> x) const {
  return 1.0 / (1.0 - x[n_]);
}

double StereographicChart::inverse_scale(std::span<const double> u) const {
  return 2.0 / (1.0 + sq_norm(u, u.size()));
}

DistortionBand distortion_probe(const StereographicChart& chart, std::span<const Ball> region,
                                int boundary_samples, double margin) {
  if (region.empty()) throw DomainError("distortion probe needs at least one ball");
  if (boundary_samples < 2) throw DomainError("distortion probe needs boundary samples");
  int n = chart.sphere_dim();
  int d = n + 1;
  Space sphere = Space::sphere_geodesic(n);

  DistortionBand band;
  band.d1 = 1e300;
  band.d2 = 0.0;

  std::uint64_t rng = 0xBA11D1570ULL;
  auto next = [&rng]() {
    rng += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = rng;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return static_cast<double>((z ^ (z >> 31)) >> 11) * 0x1.0p-53;
  };

  for (const Ball& ball : region) {
    sphere.validate_point(ball.center);
    double r = ball.radius;
    // Colatitude from the south pole; the whole ball must stay below the
    // equator margin.
    double cos_from_sp = -ball.center[n];
    double theta_c = std::acos(std::clamp(cos_from_sp, -1.0, 1.0));
    if (!(std::cos(theta_c + r) >= margin))
      throw DomainError("probe ball reaches above the equator margin");

    Vec proj_center = chart.forward(ball.center);
    double lo = 1e300, hi = 0.0;
    for (int k = 0; k < boundary_samples; ++k) {
      // Tangent direction at the center.
      Vec dir(d);
      double proj = 0.0;
      if (n == 2 && d == 3) {
        double phi = 2.0 * 3.141592653589793 * static_cast<double>(k) / boundary_samples;
        // Orthonormal tangent frame from the smallest-coordinate axis.
        Vec e1(d, 0.0);
        int axis = 0;
        for (int i = 1; i < d; ++i)
          if (std::abs(ball.center[i]) < std::abs(ball.center[axis])) axis = i;
        e1[axis] = 1.0;
        double p1 = 0.0;
        for (int i = 0; i < d; ++i) p1 += e1[i] * ball.center[i];
        double norm1 = 0.0;
        for (int i = 0; i < d; ++i) {
          e1[i] -= p1 * ball.center[i];
          norm1 += e1[i] * e1[i];
        }
        norm1 = std::sqrt(norm1);
        Vec e2 = {ball.center[1] * e1[2] - ball.center[2] * e1[1],
                  ball.center[2] * e1[0] - ball.center[0] * e1[2],
                  ball.center[0] * e1[1] - ball.center[1] * e1[0]};
        double norm2 = std::sqrt(e2[0] * e2[0] + e2[1] * e2[1] + e2[2] * e2[2]);
        for (int i = 0; i < d; ++i) dir[i] = std::cos(phi) * e1[i] / norm1 + std::sin(phi) * e2[i] / norm2;
      } else {
        // Random tangent direction (works in any dimension).
        double norm = 0.0;
        for (int i = 0; i < d; ++i) {
          double u1 = std::max(next(), 1e-300), u2 = next();
          dir[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        }
        proj = 0.0;
        for (int i = 0; i < d; ++i) proj += dir[i] * ball.center[i];
        for (int i = 0; i < d; ++i) dir[i] -= proj * ball.center[i];
        norm = std::sqrt(std::max(sq_norm(dir, dir.size()), 1e-300));
        for (int i = 0; i < d; ++i) dir[i] /= norm;
      }
      Vec bd(d);
      for (int i = 0; i < d; ++i) bd[i] = std::cos(r) * ball.center[i] + std::sin(r) * dir[i];
      Vec proj_bd = chart.forward(bd);
      double dist = 0.0;
      for (int i = 0; i < n; ++i) {
        double v = proj_bd[i] - proj_center[i];
        dist += v * v;
      }
      dist = std::sqrt(dist);
      lo = std::min(lo, dist);
      hi = std::max(hi, dist);
    }
    band.d1 = std::min(band.d1, lo / r);
    band.d2 = std::max(band.d2, hi / r);
  }
  return band;
}

IFSSpec conjugate_ifs(const IFSSpec& planar, std::shared_ptr<const StereographicChart> chart,
                      double margin) {
  if (!chart) throw DomainError("conjugation needs a chart");
  int n = chart->sphere_dim();
  if (planar.space().kind() != Space::Kind::Euclidean || planar.space().ambient_dim() != n)
    throw DomainError("planar system dimension does not match the chart");

  const Ball& seed = planar.seed();
  double center_norm = std::sqrt(sq_norm(seed.center, seed.center.size()));
  double reach = center_norm + seed.radius;
  if (!(reach < 1.0))
    throw DomainError("planar seed touches the disk boundary; the chart blows up there");

  // Chart scale bounds over the seed region.
  double x_top = (reach * reach - 1.0) / (reach * reach + 1.0);  // max lifted height
  if (!(x_top <= -margin))
    throw DomainError("lifted seed would cross the equator margin");
  double lo_norm = std::max(0.0, center_norm - seed.radius);
  double lift_bound = 2.0 / (1.0 + lo_norm * lo_norm);
  double project_bound = 1.0 / (1.0 - x_top);

  // Sphere seed ball: geodesic ball certified invariant under the
  // conjugated maps.  kappa < 1/r_max is required for the certificate.
  double r_max = 0.0;
  for (int i = 0; i < planar.map_count(); ++i)
    r_max = std::max(r_max, planar.map(i).similarity_ratio());
  double kappa = lift_bound * project_bound;
  if (!(r_max * kappa < 1.0))
    throw DomainError("cannot certify an invariant sphere seed: contraction too weak for the chart band");
  double rho = lift_bound * seed.radius / (1.0 - r_max * kappa);

  Vec sphere_center = chart->inverse(seed.center);
  // The enlarged ball must also respect the margin.
  double theta_c = std::acos(std::clamp(-sphere_center[n], -1.0, 1.0));
  if (!(std::cos(theta_c + rho) >= margin))
    throw DomainError("certified sphere seed ball crosses the equator margin");

  std::vector<ConformalMap> maps;
  maps.reserve(planar.map_count());
  for (int i = 0; i < planar.map_count(); ++i)
    maps.push_back(ConformalMap::conjugated(planar.map(i), chart, lift_bound, project_bound));

  std::vector<double> probs(planar.probs().begin(), planar.probs().end());
  return IFSSpec::create(std::move(maps), std::move(probs), Space::sphere_geodesic(n),
                         make_ball(std::move(sphere_center), rho), planar.word_budget());
}

DoublingTransferReport doubling_transfer_check(const AtomicMeasure& planar,
                                               std::shared_ptr<const StereographicChart> chart,
                                               std::span<const double> scales, int probes) {
  DoublingTransferReport report;
  report.scales.assign(scales.begin(), scales.end());

  AtomicMeasure lifted = planar.pushforward(StereographicLift(chart));

  DoublingConstantEstimate plane_est = planar.doubling_constant(scales, probes);
  DoublingConstantEstimate sphere_est = lifted.doubling_constant(scales, probes);
  report.c_plane = plane_est.c_hat;
  report.c_sphere = sphere_est.c_hat;
  report.sphere_per_scale = sphere_est.per_scale;

  // Probe the distortion band on balls at sampled support points.
  std::vector<Ball> probes_balls;
  std::size_t stride = lifted.size() > 32 ? lifted.size() / 32 : 1;
  for (std::size_t a = 0; a < lifted.size(); a += stride) {
    auto p = lifted.position(a);
    for (double r : scales) probes_balls.push_back(make_ball(Vec(p.begin(), p.end()), r));
  }
  report.band = distortion_probe(*chart, probes_balls);

  double ratio = report.band.d2 / report.band.d1;
  report.m = std::max(1, static_cast<int>(std::ceil(std::log2(ratio))));
  report.bound = std::pow(report.c_plane, report.m + 1);
  report.holds = true;
  for (double c : report.sphere_per_scale)
    if (c > report.bound * (1.0 + 1e-12)) report.holds = false;
  return report;
}

}  // namespace lqs
