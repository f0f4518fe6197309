#include "lqspectra/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lqs {

namespace {

constexpr double kLog2 = 0.6931471805599453;

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw DomainError("degenerate abscissa in slope fit");
  return sxy / sxx;
}

}  // namespace

double packing_sum(const AtomicMeasure& mu, double delta, double q) {
  return packing_sum_with_error(mu, delta, q).value;
}

BallMass packing_sum_with_error(const AtomicMeasure& mu, double delta, double q) {
  Packing packing = heavy_maximal_packing(mu, delta);
  BallMass out;
  double worst_rel_shell = 0.0;
  for (std::uint32_t c : packing.center_ids) {
    BallMass bm = mu.ball_mass_with_error(mu.position(c), delta);
    out.value += std::pow(bm.value, q);
    worst_rel_shell = std::max(worst_rel_shell, bm.shell_bound / bm.value);
  }
  out.shell_bound = worst_rel_shell;
  return out;
}

double packing_sum_sup(const AtomicMeasure& mu, double delta, double q, int restarts,
                       std::uint64_t seed) {
  if (restarts < 1) throw DomainError("packing sum needs at least one restart");
  std::vector<double> bm = atom_ball_masses(mu, delta);
  double best = -1.0;
  for (int r = 0; r < restarts; ++r) {
    Packing packing =
        r == 0 ? heavy_maximal_packing(mu, delta, bm)
               : heavy_maximal_packing_randomized(
                     mu, delta, bm, seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(r));
    double s = 0.0;
    for (std::uint32_t c : packing.center_ids) s += std::pow(bm[c], q);
    best = std::max(best, s);
  }
  return best;
}

double renyi_sum(const AtomicMeasure& mu, double lambda, double delta, double q) {
  GridPartition grid = grid_partition(mu, lambda, delta);
  double s = 0.0;
  for (const auto& cell : grid.cells) {
    double m = 0.0;
    for (std::uint32_t a : cell) m += mu.mass(a);
    if (m > 0.0) s += std::pow(m, q);
  }
  return s;
}

std::vector<double> default_q_grid() {
  return {0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0};
}

SpectrumTable build_spectrum_table(const AtomicMeasure& mu, std::span<const double> q_grid,
                                   std::span<const int> t_grid, double lambda, FitMethod method,
                                   int fit_window, int heavy_restarts, std::uint64_t seed) {
  if (q_grid.empty() || t_grid.empty()) throw DomainError("spectrum table needs q and t grids");
  if (heavy_restarts < 1) throw DomainError("spectrum table needs at least one packing restart");

  SpectrumTable table;
  table.q_grid.assign(q_grid.begin(), q_grid.end());
  table.t_grid.assign(t_grid.begin(), t_grid.end());
  std::sort(table.t_grid.begin(), table.t_grid.end());
  table.lambda = lambda;

  std::size_t nt = table.t_grid.size();
  std::size_t nq = table.q_grid.size();

  // Shared per-scale structures; the packings, grid cells and per-atom
  // ball masses are q-independent.
  struct ScaleData {
    std::vector<std::vector<double>> packing_masses;  // ball masses per restart packing
    std::vector<double> grid_cell_masses;
    std::vector<double> atom_ball_masses;
    double worst_rel_shell = 0.0;
  };
  std::vector<ScaleData> per_scale(nt);
  for (std::size_t ti = 0; ti < nt; ++ti) {
    double delta = std::pow(2.0, -table.t_grid[ti]);
    ScaleData& sd = per_scale[ti];
    sd.atom_ball_masses = atom_ball_masses(mu, delta);

    for (int r = 0; r < heavy_restarts; ++r) {
      Packing packing =
          r == 0 ? heavy_maximal_packing(mu, delta, sd.atom_ball_masses)
                 : heavy_maximal_packing_randomized(
                       mu, delta, sd.atom_ball_masses,
                       seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(r));
      std::vector<double> masses;
      masses.reserve(packing.center_ids.size());
      for (std::uint32_t c : packing.center_ids) {
        BallMass bm = mu.ball_mass_with_error(mu.position(c), delta);
        masses.push_back(bm.value);
        sd.worst_rel_shell = std::max(sd.worst_rel_shell, bm.shell_bound / bm.value);
      }
      sd.packing_masses.push_back(std::move(masses));
    }

    GridPartition grid = grid_partition(mu, lambda, delta);
    for (const auto& cell : grid.cells) {
      double m = 0.0;
      for (std::uint32_t a : cell) m += mu.mass(a);
      sd.grid_cell_masses.push_back(m);
    }
  }

  table.entries.resize(nq * nt);
  for (std::size_t qi = 0; qi < nq; ++qi) {
    double q = table.q_grid[qi];
    for (std::size_t ti = 0; ti < nt; ++ti) {
      const ScaleData& sd = per_scale[ti];
      SpectrumEntry& e = table.entries[qi * nt + ti];
      e.q = q;
      e.t = table.t_grid[ti];
      e.error_bound = sd.worst_rel_shell;
      e.s_heavy = 0.0;
      for (const auto& masses : sd.packing_masses) {
        double s = 0.0;
        for (double m : masses) s += std::pow(m, q);
        e.s_heavy = std::max(e.s_heavy, s);
      }
      e.s_grid = 0.0;
      for (double m : sd.grid_cell_masses) e.s_grid += std::pow(m, q);
      if (q == 1.0) {
        e.i_gd = std::numeric_limits<double>::quiet_NaN();
      } else {
        e.i_gd = 0.0;
        for (std::size_t a = 0; a < mu.size(); ++a)
          e.i_gd += mu.mass(a) * std::pow(sd.atom_ball_masses[a], q - 1.0);
      }
    }
  }

  for (std::size_t qi = 0; qi < nq; ++qi) {
    double q = table.q_grid[qi];
    QFit fit;
    fit.q = q;
    auto [tau, residual] = tau_fit(table, q, method, fit_window);
    fit.tau_hat = tau;
    fit.residual = residual;
    fit.dim_hat = q == 1.0 ? std::numeric_limits<double>::quiet_NaN() : tau / (q - 1.0);
    if (q > 0.0 && q != 1.0) {
      std::vector<double> xs, ys;
      for (std::size_t ti = 0; ti < nt; ++ti) {
        double delta = std::pow(2.0, -table.t_grid[ti]);
        xs.push_back((q - 1.0) * std::log(delta));
        ys.push_back(std::log(table.at(qi, ti).i_gd));
      }
      fit.gd_dim = least_squares_slope(xs, ys);
    } else {
      fit.gd_dim = std::numeric_limits<double>::quiet_NaN();
    }
    table.fits.push_back(fit);
  }
  return table;
}

std::pair<double, double> tau_fit(const SpectrumTable& table, double q, FitMethod method,
                                  int window) {
  std::size_t qi = table.q_grid.size();
  for (std::size_t i = 0; i < table.q_grid.size(); ++i)
    if (table.q_grid[i] == q) qi = i;
  if (qi == table.q_grid.size()) throw DomainError("q value not present in the table");
  std::size_t nt = table.t_grid.size();
  if (nt < 3) throw DomainError("tau fit needs at least three scales");

  std::vector<double> log_s(nt);
  for (std::size_t ti = 0; ti < nt; ++ti) log_s[ti] = std::log(table.at(qi, ti).s_heavy);

  std::size_t first = 0;
  if (method == FitMethod::LeastSquares && window > 0 && static_cast<std::size_t>(window) < nt)
    first = nt - static_cast<std::size_t>(window);

  double tau = 0.0;
  if (method == FitMethod::Endpoint) {
    tau = log_s[nt - 1] / (-static_cast<double>(table.t_grid[nt - 1]) * kLog2);
  } else {
    std::vector<double> xs, ys;
    for (std::size_t ti = first; ti < nt; ++ti) {
      xs.push_back(-static_cast<double>(table.t_grid[ti]) * kLog2);
      ys.push_back(log_s[ti]);
    }
    if (xs.size() < 2) throw DomainError("tau fit window too small");
    tau = least_squares_slope(xs, ys);
  }

  double residual = 0.0;
  std::size_t res_first = method == FitMethod::Endpoint ? 0 : first;
  for (std::size_t ti = res_first + 1; ti < nt; ++ti) {
    double dt = static_cast<double>(table.t_grid[ti] - table.t_grid[ti - 1]);
    double slope = (log_s[ti] - log_s[ti - 1]) / (-dt * kLog2);
    residual = std::max(residual, std::abs(slope - tau));
  }
  return {tau, residual};
}

double dimension_q(double tau_hat, double q) {
  if (q == 1.0) throw DomainError("L^q dimension is undefined at q = 1");
  return tau_hat / (q - 1.0);
}

double gd_dimension(const AtomicMeasure& mu, double q, std::span<const double> scales) {
  if (!(q > 0.0) || q == 1.0)
    throw DomainError("generalized dimension needs q in (0, inf) away from 1");
  if (scales.size() < 2) throw DomainError("generalized dimension needs at least two scales");
  std::vector<double> xs, ys;
  for (double delta : scales) {
    xs.push_back((q - 1.0) * std::log(delta));
    ys.push_back(std::log(mu.lq_sum(delta, q)));
  }
  return least_squares_slope(xs, ys);
}

std::vector<std::pair<double, double>> legendre(std::span<const double> q_grid,
                                                std::span<const double> tau_values,
                                                std::span<const double> alpha_grid) {
  if (q_grid.empty() || q_grid.size() != tau_values.size())
    throw DomainError("legendre needs aligned q and tau samples");
  std::vector<std::pair<double, double>> out;
  out.reserve(alpha_grid.size());
  for (double alpha : alpha_grid) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < q_grid.size(); ++i)
      best = std::min(best, alpha * q_grid[i] - tau_values[i]);
    out.emplace_back(alpha, best);
  }
  return out;
}

MultiplicativityReport multiplicativity_check(const AtomicMeasure& mu, double q,
                                              std::span<const int> levels, int heavy_restarts,
                                              std::uint64_t seed) {
  if (!(q > 0.0)) throw DomainError("multiplicativity check needs q > 0");
  if (levels.size() < 2) throw DomainError("multiplicativity check needs at least two levels");

  std::vector<int> ts(levels.begin(), levels.end());
  std::sort(ts.begin(), ts.end());
  int deepest = ts.back() + ts.back();
  if (std::pow(2.0, -deepest) < mu.scale_floor())
    throw DomainError("level pair sums fall below the scale floor");

  MultiplicativityReport report;
  report.q = q;
  report.submultiplicative_direction = q >= 1.0;

  // a_t at the levels and at all pairwise sums.
  std::vector<int> needed = ts;
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = i; j < ts.size(); ++j) needed.push_back(ts[i] + ts[j]);
  std::sort(needed.begin(), needed.end());
  needed.erase(std::unique(needed.begin(), needed.end()), needed.end());

  std::vector<std::pair<int, double>> a;
  for (int t : needed)
    a.emplace_back(t, std::log(packing_sum_sup(mu, std::pow(2.0, -t), q, heavy_restarts, seed)));
  auto a_of = [&](int t) {
    for (auto& [lvl, v] : a)
      if (lvl == t) return v;
    throw DomainError("internal: level missing");
  };

  double worst_sub = 0.0, worst_super = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = i; j < ts.size(); ++j) {
      int s = ts[i], t = ts[j];
      double defect_sub = a_of(s + t) - a_of(s) - a_of(t);
      worst_sub = std::max(worst_sub, defect_sub);
      worst_super = std::max(worst_super, -defect_sub);
      report.pairs.emplace_back(s, t);
      report.defects.push_back(report.submultiplicative_direction ? defect_sub : -defect_sub);
    }
  report.l_hat_sub = std::exp(worst_sub);
  report.l_hat_super = std::exp(worst_super);
  report.l_hat = report.submultiplicative_direction ? report.l_hat_sub : report.l_hat_super;
  return report;
}

CutMassProfile cut_mass_profile(const AtomicMeasure& mu, const IFSSpec& spec, int t,
                                const Packing& packing, double q, int s) {
  CutMassProfile profile;
  profile.t = t;
  profile.q = q;
  profile.s = s;
  profile.ball_radius = 2.0 * std::pow(2.0, -t);
  profile.ball_center_ids = packing.center_ids;

  CutSet cut = cut_set(spec, t);
  std::size_t nb = packing.center_ids.size();
  profile.p_plus.assign(nb, 0.0);
  profile.p_minus.assign(nb, 0.0);

  // Representative-point membership, inflated by the cylinder diameter
  // bound: sound for "K_u meets 2*B".
  std::vector<Vec> reps;
  reps.reserve(cut.words.size());
  for (const Word& w : cut.words) reps.push_back(w.map.apply(spec.anchor()));

  for (std::size_t b = 0; b < nb; ++b) {
    auto center = mu.position(packing.center_ids[b]);
    for (std::size_t wi = 0; wi < cut.words.size(); ++wi) {
      double reach = 2.0 * profile.ball_radius + cut.words[wi].diam_bound;
      if (mu.space().distance(center, reps[wi]) <= reach) profile.p_plus[b] += cut.words[wi].prob;
    }
  }

  // q-heavy assignment through a fine partition at scale 2^-(s+t).
  double fine_delta = std::pow(2.0, -(s + t));
  MaximalPartition fine = maximal_partition(heavy_maximal_packing(mu, fine_delta), mu);
  std::size_t ncells = fine.cells.size();

  // Cells meeting each doubled ball: any member atom inside.
  std::vector<std::vector<std::uint32_t>> cells_meeting(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    std::vector<std::uint32_t>& hit = cells_meeting[b];
    mu.index().for_each_in_range(mu.position(packing.center_ids[b]), profile.ball_radius,
                                 [&](std::uint32_t id, double) {
                                   std::uint32_t c = fine.cell_of_atom[id];
                                   if (std::find(hit.begin(), hit.end(), c) == hit.end())
                                     hit.push_back(c);
                                 });
  }

  std::vector<double> pulled(ncells, 0.0);
  for (std::size_t wi = 0; wi < cut.words.size(); ++wi) {
    std::fill(pulled.begin(), pulled.end(), 0.0);
    // mu(S_u^{-1}(E_j)) = mass of atoms mapped into cell j by S_u.
    for (std::uint32_t a = 0; a < mu.size(); ++a) {
      Vec y = cut.words[wi].map.apply(mu.position(a));
      double best_core = -1.0;
      std::uint32_t annulus = std::numeric_limits<std::uint32_t>::max();
      std::uint32_t nearest = 0;
      double nearest_d = std::numeric_limits<double>::infinity();
      std::uint32_t core = std::numeric_limits<std::uint32_t>::max();
      for (std::uint32_t j = 0; j < fine.center_ids.size(); ++j) {
        double d = mu.space().distance(y, mu.position(fine.center_ids[j]));
        if (d <= fine.delta && best_core < 0.0) {
          core = j;
          best_core = d;
          break;
        }
        if (d <= 2.0 * fine.delta && annulus == std::numeric_limits<std::uint32_t>::max())
          annulus = j;
        if (d < nearest_d) {
          nearest_d = d;
          nearest = j;
        }
      }
      std::uint32_t cell = core != std::numeric_limits<std::uint32_t>::max()
                               ? core
                               : (annulus != std::numeric_limits<std::uint32_t>::max() ? annulus
                                                                                       : nearest);
      pulled[cell] += mu.mass(a);
    }
    double best_w = -1.0;
    std::size_t best_b = 0;
    for (std::size_t b = 0; b < nb; ++b) {
      double w = 0.0;
      for (std::uint32_t c : cells_meeting[b])
        if (pulled[c] > 0.0) w += std::pow(pulled[c], q);
      if (w > best_w) {
        best_w = w;
        best_b = b;
      }
    }
    profile.p_minus[best_b] += cut.words[wi].prob;
  }
  return profile;
}

double moran_tau(std::span<const double> probs, std::span<const double> ratios, double q) {
  if (probs.size() != ratios.size() || probs.empty())
    throw DomainError("moran equation needs aligned probability and ratio vectors");
  double total = 0.0;
  for (double p : probs) {
    if (!(p > 0.0)) throw DomainError("moran probabilities must be positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("moran probabilities must sum to 1");
  for (double r : ratios)
    if (!(r > 0.0 && r < 1.0)) throw DomainError("moran ratios must lie in (0, 1)");

  auto f = [&](double tau) {
    double s = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i)
      s += std::pow(probs[i], q) * std::pow(ratios[i], -tau);
    return s - 1.0;
  };
  double lo = -64.0, hi = 64.0;
  if (f(lo) > 0.0 || f(hi) < 0.0) throw DomainError("moran root not bracketed");
  for (int iter = 0; iter < 200 && hi - lo > 1e-13; ++iter) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

bool powersum_check(std::span<const double> values, double q) {
  if (!(q > 0.0)) throw DomainError("power sum inequality needs q > 0");
  double sum = 0.0, sum_q = 0.0;
  for (double a : values) {
    if (a < 0.0) throw DomainError("power sum inequality needs nonnegative entries");
    sum += a;
    sum_q += std::pow(a, q);
  }
  double k = static_cast<double>(values.size());
  double a0 = std::max(std::pow(k, q - 1.0), 1.0);
  return std::pow(sum, q) <= a0 * sum_q * (1.0 + 1e-12) + 1e-300;
}

}  // namespace lqs
