#include "lqspectra/run.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "lqspectra/entropy.hpp"
#include "lqspectra/io.hpp"

namespace lqs {

namespace {

constexpr double kLog2 = 0.6931471805599453;

std::string fmt(double v, int prec = 4) {
  std::ostringstream ss;
  ss.precision(prec);
  ss << std::fixed << v;
  return ss.str();
}

AtomicMeasure load_measure(const ParsedInput& input, const RunConfig& config, double delta_atom) {
  if (input.atoms) return *input.atoms;
  IFSSpec spec = input.ifs->with_budget(config.word_budget);
  return attractor_atoms(spec, delta_atom);
}

double resolve_delta_atom(const RunConfig& config) {
  double d = config.delta_atom > 0.0 ? config.delta_atom : std::pow(2.0, -(config.t_max + 8));
  return d;
}

void validate_scales(const RunConfig& config, const AtomicMeasure& mu) {
  if (config.t_min > config.t_max) throw DomainError("t range is empty");
  if (std::pow(2.0, -config.t_max) < mu.scale_floor())
    throw DomainError("t_max " + std::to_string(config.t_max) +
                      " falls below the resolution-implied scale floor; lower delta_atom or t_max");
}

std::vector<int> t_range(const RunConfig& config) {
  std::vector<int> ts;
  for (int t = config.t_min; t <= config.t_max; ++t) ts.push_back(t);
  return ts;
}

std::string out_path(const RunConfig& config, const std::string& name) {
  std::filesystem::create_directories(config.out_dir);
  return (std::filesystem::path(config.out_dir) / name).string();
}

std::vector<std::pair<std::string, std::string>> config_meta(const RunConfig& config,
                                                             double delta_atom) {
  return {
      {"spec", config.spec_path},
      {"seed", std::to_string(config.seed)},
      {"delta_atom", format_double(delta_atom)},
      {"t_min", std::to_string(config.t_min)},
      {"t_max", std::to_string(config.t_max)},
      {"lambda", format_double(config.lambda)},
      {"restarts", std::to_string(config.restarts)},
  };
}

}  // namespace

CommandResult run_spectrum(const RunConfig& config) {
  CommandResult result;
  for (double q : config.q_list) {
    if (q == 1.0)
      throw DomainError("dimension columns are undefined at q = 1; use the entropy command");
    if (q < 0.0) throw DomainError("negative q is out of scope for the spectrum pipeline");
  }

  ParsedInput input = read_input_file(config.spec_path);
  double delta_atom = resolve_delta_atom(config);
  AtomicMeasure mu = load_measure(input, config, delta_atom);
  validate_scales(config, mu);

  std::vector<double> q_grid = {0.0, 1.0};
  q_grid.insert(q_grid.end(), config.q_list.begin(), config.q_list.end());
  std::sort(q_grid.begin(), q_grid.end());
  q_grid.erase(std::unique(q_grid.begin(), q_grid.end()), q_grid.end());

  std::vector<int> ts = t_range(config);
  SpectrumTable table = build_spectrum_table(mu, q_grid, ts, config.lambda, config.fit,
                                           config.fit_window, config.restarts, config.seed);

  write_spectrum_csv(out_path(config, "spectrum.csv"), table);
  write_spectrum_json(out_path(config, "spectrum.json"), table, config_meta(config, delta_atom));

  for (const QFit& fit : table.fits) {
    if (fit.q == 0.0 || fit.q == 1.0) continue;
    double gap = std::abs(fit.dim_hat - fit.gd_dim);
    result.summary.push_back("q=" + fmt(fit.q, 2) + " tau_hat=" + fmt(fit.tau_hat) +
                             " dim_hat=" + fmt(fit.dim_hat) + " gd_dim=" + fmt(fit.gd_dim) +
                             " equivalence_gap=" + fmt(gap));
  }
  return result;
}

CommandResult run_entropy(const RunConfig& config) {
  CommandResult result;
  ParsedInput input = read_input_file(config.spec_path);
  double delta_atom = resolve_delta_atom(config);
  AtomicMeasure mu = load_measure(input, config, delta_atom);
  validate_scales(config, mu);

  DoublingGate gate = doubling_gate(mu, config.probes);
  if (!gate.ok) {
    if (!config.force) {
      result.exit_code = 1;
      result.summary.push_back("refused: " + gate.message);
      result.summary.push_back("rerun with --force to override the doubling-measure gate");
      return result;
    }
    result.summary.push_back("warning: " + gate.message + " (forced)");
  }

  std::vector<int> ts = t_range(config);
  EntropyTrace trace = build_entropy_trace(mu, ts, config.restarts, config.seed);
  write_entropy_csv(out_path(config, "entropy.csv"), trace);
  write_entropy_json(out_path(config, "entropy.json"), trace, config_meta(config, delta_atom));

  // Scale-step allowance: h*_{t+1} <= h*_t + C^log2(10).
  double allowance = std::pow(trace.doubling_c_hat, std::log2(10.0));
  bool monotone_ok = true;
  for (std::size_t i = 1; i < trace.h_star.size(); ++i)
    if (trace.h_star[i] > trace.h_star[i - 1] + allowance) monotone_ok = false;

  result.summary.push_back("dim_e_hat=" + fmt(trace.dim_e_hat) +
                           " doubling_c_hat=" + fmt(trace.doubling_c_hat) +
                           " step_allowance=" + (monotone_ok ? std::string("ok") : std::string("violated")));
  if (!monotone_ok) result.exit_code = 1;
  return result;
}

CommandResult run_pack(const RunConfig& config) {
  CommandResult result;
  ParsedInput input = read_input_file(config.spec_path);
  double delta_atom = resolve_delta_atom(config);
  AtomicMeasure mu = load_measure(input, config, delta_atom);

  Packing packing = heavy_maximal_packing(mu, config.pack_delta);
  MaximalPartition part = maximal_partition(packing, mu);

  write_packing_csv(out_path(config, "packing.csv"), packing, mu);
  write_cells_csv(out_path(config, "cells.csv"), part, mu);
  write_atoms_csv(out_path(config, "atoms.csv"), mu);

  VerifyReport pr = verify(packing, mu);
  VerifyReport mr = verify(part, mu);
  bool ok = pr.all_pass() && mr.all_pass();
  result.summary.push_back("packing: " + std::to_string(packing.center_ids.size()) +
                           " balls at delta=" + fmt(config.pack_delta) +
                           (ok ? " (verified)" : " (verification FAILED)"));
  if (!ok) result.exit_code = 1;
  return result;
}

CommandResult run_verify(const RunConfig& config) {
  CommandResult result;
  ParsedInput input = read_input_file(config.spec_path);
  double delta_atom = resolve_delta_atom(config);
  AtomicMeasure mu = load_measure(input, config, delta_atom);

  std::vector<NamedReport> reports;
  std::vector<std::pair<std::string, double>> constants;

  if (!config.packing_csv.empty()) {
    auto [packing, on_support] = import_packing_csv(config.packing_csv, mu);
    VerifyReport report = verify(packing, mu);
    report.checks.insert(report.checks.begin(), on_support);
    reports.push_back({"imported packing", report});
  } else {
    // Structural invariants at a few dyadic scales plus the empirical
    // sandwich constants.
    int t_lo = 3;
    int t_hi = 6;
    while (std::pow(2.0, -t_hi - 1) < mu.scale_floor() && t_hi > t_lo) --t_hi;

    double c1_hat = 1.0, c2_hat = 1.0, c3_hat = 1.0;
    for (int t = t_lo; t <= t_hi; ++t) {
      double delta = std::pow(2.0, -t);
      if (delta < mu.scale_floor()) continue;
      Packing packing = heavy_maximal_packing(mu, delta);
      MaximalPartition part = maximal_partition(packing, mu);
      GridPartition grid = grid_partition(mu, config.lambda, delta);
      reports.push_back({"packing t=" + std::to_string(t), verify(packing, mu)});
      reports.push_back({"partition t=" + std::to_string(t), verify(part, mu)});
      reports.push_back({"grid t=" + std::to_string(t), verify(grid, mu)});

      std::vector<double> bm = atom_ball_masses(mu, delta);
      for (std::size_t j = 0; j < part.cells.size(); ++j) {
        double cell_mass = 0.0;
        for (std::uint32_t a : part.cells[j]) cell_mass += mu.mass(a);
        c1_hat = std::max(c1_hat, cell_mass / bm[packing.center_ids[j]]);
      }

      double s_heavy = 0.0;
      for (std::uint32_t c : packing.center_ids) s_heavy += bm[c] * bm[c];
      double best = s_heavy;
      for (int k = 0; k < 32; ++k) {
        Packing rnd = random_maximal_packing(mu, delta, config.seed + 977 * k + t);
        double s = 0.0;
        for (std::uint32_t c : rnd.center_ids) {
          double m = bm[c];
          s += m * m;
        }
        best = std::max(best, s);
      }
      c2_hat = std::max(c2_hat, best / s_heavy);

      double s_grid = 0.0;
      for (const auto& cell : grid.cells) {
        double m = 0.0;
        for (std::uint32_t a : cell) m += mu.mass(a);
        s_grid += m * m;
      }
      c3_hat = std::max({c3_hat, s_grid / s_heavy, s_heavy / s_grid});
    }
    constants.emplace_back("C1_hat", c1_hat);
    constants.emplace_back("C2_hat", c2_hat);
    constants.emplace_back("C3_hat", c3_hat);

    // Entropy-side constants.
    double c4_hat = 0.0;
    std::vector<int> ent_ts;
    for (int t = t_lo; t <= t_hi; ++t)
      if (std::pow(2.0, -t) >= mu.scale_floor()) ent_ts.push_back(t);
    if (ent_ts.size() >= 2) {
      for (int t : ent_ts) {
        double h = h_star_t(mu, t, std::max(2, config.restarts / 2), config.seed);
        c4_hat = std::max(c4_hat, std::abs(h - ball_log_integral(mu, t)));
      }
      constants.emplace_back("C4_hat", c4_hat);
      std::vector<int> pair_levels{ent_ts.front(),
                                   std::min(ent_ts.front() + 1, ent_ts.back())};
      SuperadditivityReport super =
          superadditivity_check(mu, pair_levels, std::max(2, config.restarts / 2), config.seed);
      constants.emplace_back("L_hat_entropy", super.l_hat);
    }
    std::vector<int> mult_levels{t_lo, t_lo + 1};
    if (std::pow(2.0, -(2 * (t_lo + 1))) >= mu.scale_floor()) {
      constants.emplace_back("L_hat_sub_q2", multiplicativity_check(mu, 2.0, mult_levels).l_hat);
      constants.emplace_back("L_hat_super_q05",
                             multiplicativity_check(mu, 0.5, mult_levels).l_hat);
    }
  }

  write_verify_json(out_path(config, "verify.json"), reports, constants);

  bool all = true;
  for (const NamedReport& r : reports) all = all && r.report.all_pass();
  result.exit_code = all ? 0 : 1;
  result.summary.push_back(std::string("verify: ") + (all ? "all checks passed" : "FAILURES") +
                           " (" + std::to_string(reports.size()) + " objects)");
  for (const auto& [name, value] : constants)
    result.summary.push_back("  " + name + " = " + fmt(value));
  return result;
}

CommandResult run_sphere_lift(const RunConfig& config) {
  CommandResult result;
  ParsedInput input = read_input_file(config.spec_path);
  if (!input.ifs) throw DomainError("sphere-lift needs a CIFS spec (not a direct atom list)");
  const IFSSpec& planar = *input.ifs;
  if (planar.space().kind() != Space::Kind::Euclidean)
    throw DomainError("sphere-lift expects a planar (euclidean) system");

  std::shared_ptr<const StereographicChart> chart =
      input.chart ? input.chart
                  : std::make_shared<StereographicChart>(planar.space().intrinsic_dim());

  IFSSpec lifted_spec = conjugate_ifs(planar, chart);
  double delta_atom = resolve_delta_atom(config);
  AtomicMeasure planar_mu = attractor_atoms(planar.with_budget(config.word_budget), delta_atom);
  AtomicMeasure sphere_mu = planar_mu.pushforward(StereographicLift(chart));
  validate_scales(config, planar_mu);

  std::vector<int> ts = t_range(config);
  std::vector<double> q_grid = {0.5, 2.0};
  for (double q : config.q_list)
    if (q > 0.0 && q != 1.0) q_grid.push_back(q);
  std::sort(q_grid.begin(), q_grid.end());
  q_grid.erase(std::unique(q_grid.begin(), q_grid.end()), q_grid.end());

  SpectrumTable planar_table =
      build_spectrum_table(planar_mu, q_grid, ts, config.lambda, config.fit,
                           config.fit_window, config.restarts, config.seed);
  SpectrumTable sphere_table =
      build_spectrum_table(sphere_mu, q_grid, ts, config.lambda, config.fit,
                           config.fit_window, config.restarts, config.seed);

  std::vector<double> probe_scales;
  for (int t = config.t_min; t <= std::min(config.t_min + 2, config.t_max); ++t)
    probe_scales.push_back(std::pow(2.0, -t));
  DoublingTransferReport transfer =
      doubling_transfer_check(planar_mu, chart, probe_scales, config.probes);

  write_atoms_csv(out_path(config, "atoms_sphere.csv"), sphere_mu);
  write_spectrum_csv(out_path(config, "spectrum_planar.csv"), planar_table);
  write_spectrum_csv(out_path(config, "spectrum_sphere.csv"), sphere_table);

  std::vector<std::pair<std::string, std::string>> meta = config_meta(config, delta_atom);
  meta.emplace_back("band_d1", format_double(transfer.band.d1));
  meta.emplace_back("band_d2", format_double(transfer.band.d2));
  meta.emplace_back("c_plane", format_double(transfer.c_plane));
  meta.emplace_back("c_sphere", format_double(transfer.c_sphere));
  meta.emplace_back("transfer_bound", format_double(transfer.bound));
  meta.emplace_back("transfer_holds", transfer.holds ? "true" : "false");
  write_spectrum_json(out_path(config, "lift.json"), sphere_table, meta);

  for (std::size_t qi = 0; qi < q_grid.size(); ++qi) {
    double gap = std::abs(planar_table.fits[qi].dim_hat - sphere_table.fits[qi].dim_hat);
    result.summary.push_back("q=" + fmt(q_grid[qi], 2) +
                             " dim_planar=" + fmt(planar_table.fits[qi].dim_hat) +
                             " dim_sphere=" + fmt(sphere_table.fits[qi].dim_hat) +
                             " gap=" + fmt(gap));
  }
  result.summary.push_back("distortion band sphere/plane: [" +
                           fmt(transfer.band.sphere_to_plane_lo()) + ", " +
                           fmt(transfer.band.sphere_to_plane_hi()) + "]");
  result.summary.push_back(std::string("doubling transfer bound: ") +
                           (transfer.holds ? "holds" : "VIOLATED") + " (c_sphere=" +
                           fmt(transfer.c_sphere) + " <= " + fmt(transfer.bound) + ")");
  if (!transfer.holds) result.exit_code = 1;
  return result;
}

}  // namespace lqs
