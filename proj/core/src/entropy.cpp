#include "lqspectra/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lqs {

namespace {

constexpr double kLog2 = 0.6931471805599453;

}  // namespace

double partition_entropy(const AtomicMeasure& mu,
                         const std::vector<std::vector<std::uint32_t>>& cells) {
  std::vector<std::uint32_t> seen(mu.size(), 0);
  for (std::size_t j = 0; j < cells.size(); ++j)
    for (std::uint32_t a : cells[j]) {
      if (a >= mu.size()) throw DomainError("cell references atom " + std::to_string(a));
      if (++seen[a] > 1)
        throw DomainError("cells overlap at atom " + std::to_string(a));
    }
  for (std::uint32_t a = 0; a < mu.size(); ++a)
    if (seen[a] == 0) throw DomainError("atom " + std::to_string(a) + " missing from the partition");

  double h = 0.0;
  for (const auto& cell : cells) {
    double m = 0.0;
    for (std::uint32_t a : cell) m += mu.mass(a);
    if (m > 0.0) h -= m * std::log(m);
  }
  return h;
}

double h_star_t(const AtomicMeasure& mu, int t, int restarts, std::uint64_t seed) {
  if (restarts < 1) throw DomainError("h* needs at least one restart");
  double delta = std::pow(2.0, -t);
  if (delta < mu.scale_floor())
    throw DomainError("level " + std::to_string(t) + " is below the scale floor");

  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Packing packing = r == 0 ? heavy_maximal_packing(mu, delta)
                             : heavy_maximal_packing_randomized(
                                   mu, delta, seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(r));
    MaximalPartition part = maximal_partition(packing, mu);
    best = std::min(best, partition_entropy(mu, part.cells));
  }
  return best;
}

double entropy_dimension(const AtomicMeasure& mu, std::span<const int> t_grid, int restarts,
                         std::uint64_t seed) {
  if (t_grid.size() < 3) throw DomainError("entropy dimension needs at least three levels");
  double mx = 0, my = 0;
  std::vector<double> xs, ys;
  for (int t : t_grid) {
    xs.push_back(static_cast<double>(t) * kLog2);
    ys.push_back(h_star_t(mu, t, restarts, seed));
    mx += xs.back();
    my += ys.back();
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

double ball_log_integral(const AtomicMeasure& mu, int t) {
  double r = std::pow(2.0, -t);
  if (r < mu.scale_floor())
    throw DomainError("level " + std::to_string(t) + " is below the scale floor");
  double s = 0.0;
  for (std::size_t a = 0; a < mu.size(); ++a)
    s -= mu.mass(a) * std::log(mu.ball_mass(mu.position(a), r));
  return s;
}

EntropyTrace build_entropy_trace(const AtomicMeasure& mu, std::span<const int> t_grid,
                                 int restarts, std::uint64_t seed) {
  EntropyTrace trace;
  trace.t_grid.assign(t_grid.begin(), t_grid.end());
  std::sort(trace.t_grid.begin(), trace.t_grid.end());
  for (int t : trace.t_grid) {
    trace.h_star.push_back(h_star_t(mu, t, restarts, seed));
    trace.ball_log.push_back(ball_log_integral(mu, t));
  }
  // Slope of h* on t log 2.
  std::size_t n = trace.t_grid.size();
  if (n >= 3) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += trace.t_grid[i] * kLog2;
      my += trace.h_star[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double x = trace.t_grid[i] * kLog2;
      sxx += (x - mx) * (x - mx);
      sxy += (x - mx) * (trace.h_star[i] - my);
    }
    trace.dim_e_hat = sxy / sxx;
  }

  std::vector<double> scales;
  for (int t : trace.t_grid) {
    double r = std::pow(2.0, -t);
    if (r >= mu.scale_floor() && (mu.support_diameter() <= 0.0 || r <= mu.support_diameter()))
      scales.push_back(r);
  }
  if (!scales.empty()) trace.doubling_c_hat = mu.doubling_constant(scales, 256).c_hat;
  return trace;
}

SuperadditivityReport superadditivity_check(const AtomicMeasure& mu, std::span<const int> levels,
                                            int restarts, std::uint64_t seed) {
  if (levels.size() < 2) throw DomainError("superadditivity check needs at least two levels");
  std::vector<int> ts(levels.begin(), levels.end());
  std::sort(ts.begin(), ts.end());
  if (std::pow(2.0, -(ts.back() + ts.back())) < mu.scale_floor())
    throw DomainError("level pair sums fall below the scale floor");

  std::vector<int> needed = ts;
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = i; j < ts.size(); ++j) needed.push_back(ts[i] + ts[j]);
  std::sort(needed.begin(), needed.end());
  needed.erase(std::unique(needed.begin(), needed.end()), needed.end());

  std::vector<std::pair<int, double>> h;
  for (int t : needed) h.emplace_back(t, h_star_t(mu, t, restarts, seed));
  auto h_of = [&](int t) {
    for (auto& [lvl, v] : h)
      if (lvl == t) return v;
    throw DomainError("internal: level missing");
  };

  SuperadditivityReport report;
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = i; j < ts.size(); ++j) {
      double defect = h_of(ts[i]) + h_of(ts[j]) - h_of(ts[i] + ts[j]);
      report.pairs.emplace_back(ts[i], ts[j]);
      report.defects.push_back(defect);
      report.l_hat = std::max(report.l_hat, defect);
    }
  return report;
}

DoublingGate doubling_gate(const AtomicMeasure& mu, int probes) {
  DoublingGate gate;
  double diam = mu.support_diameter();
  double hi = diam > 0.0 ? diam / 4.0 : 1.0;
  std::vector<double> scales;
  for (double r = hi; r >= mu.scale_floor() && scales.size() < 12; r /= 2.0) scales.push_back(r);
  if (scales.size() < 4) {
    gate.message = "too few probe scales for a drift verdict; assuming doubling";
    return gate;
  }
  gate.estimate = mu.doubling_constant(scales, probes);

  // scales run large -> small; an unbounded measure shows ratios climbing
  // toward the small end.
  const auto& per = gate.estimate.per_scale;
  bool increasing = true;
  for (std::size_t i = 1; i < per.size(); ++i)
    if (per[i] <= per[i - 1]) increasing = false;
  double growth = per.back() / per.front();
  if (increasing && growth >= 4.0) {
    gate.ok = false;
    gate.message =
        "per-scale doubling ratios drift upward without bound (growth factor " +
        std::to_string(growth) + " over " + std::to_string(per.size()) +
        " dyadic scales); the entropy-dimension estimators assume a doubling measure";
  }
  return gate;
}

}  // namespace lqs
