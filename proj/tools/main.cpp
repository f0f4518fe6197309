#include <cstdio>
#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "lqspectra/errors.hpp"
#include "lqspectra/run.hpp"

namespace {

// Exit codes: 0 ok, 1 invariant failure, 2 usage/parse, 3 resource.
int dispatch(lqs::CommandResult (*command)(const lqs::RunConfig&), const lqs::RunConfig& config) {
  try {
    lqs::CommandResult result = command(config);
    for (const std::string& line : result.summary) std::cout << line << '\n';
    return result.exit_code;
  } catch (const lqs::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << '\n';
    return 3;
  } catch (const lqs::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const lqs::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const lqs::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

void add_common(CLI::App* cmd, lqs::RunConfig& config) {
  cmd->add_option("-s,--spec", config.spec_path, "IFS spec file (JSON)")->required();
  cmd->add_option("-o,--out", config.out_dir, "output directory");
  cmd->add_option("--delta-atom", config.delta_atom,
                  "atom resolution (default: 2^-(t_max+8))");
  cmd->add_option("--budget", config.word_budget, "word budget for cut sets");
  cmd->add_option("--seed", config.seed, "seed for all tie randomization");
  cmd->add_option("--t-min", config.t_min, "shallowest dyadic level");
  cmd->add_option("--t-max", config.t_max, "deepest dyadic level");
  cmd->add_option("--lambda", config.lambda, "grid partition lambda in (0, 1/2]");
  cmd->add_option("--restarts", config.restarts, "partition restarts for entropy minima");
  cmd->add_option("--probes", config.probes, "probe count for doubling estimates");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical L^q-spectra, Renyi and entropy dimensions of self-conformal measures"};
  app.require_subcommand(1);

  lqs::RunConfig config;
  std::string fit_name = "ls";
  int rc = 0;

  auto* spectrum = app.add_subcommand(
      "spectrum", "packing/grid/integral power sums, tau(q) and dimension estimates");
  add_common(spectrum, config);
  spectrum->add_option("-q,--q", config.q_list, "q values (1 excluded; diagnostics 0,1 added)");
  spectrum->add_option("--fit", fit_name, "tau fit: ls | endpoint");
  spectrum->add_option("--fit-window", config.fit_window,
                       "scales in the least-squares window (default 0: all)");
  spectrum->callback([&] {
    config.fit = fit_name == "endpoint" ? lqs::FitMethod::Endpoint : lqs::FitMethod::LeastSquares;
    rc = dispatch(lqs::run_spectrum, config);
  });

  auto* entropy = app.add_subcommand("entropy", "h* partition entropies and entropy dimension");
  add_common(entropy, config);
  entropy->add_flag("--force", config.force, "run even when the doubling gate refuses");
  entropy->callback([&] { rc = dispatch(lqs::run_entropy, config); });

  auto* pack = app.add_subcommand("pack", "export a heavy maximal packing and its partition");
  add_common(pack, config);
  pack->add_option("--delta", config.pack_delta, "packing radius");
  pack->callback([&] { rc = dispatch(lqs::run_pack, config); });

  auto* verify = app.add_subcommand("verify", "run the invariant suite, emit a JSON report");
  add_common(verify, config);
  verify->add_option("--packing-csv", config.packing_csv, "audit an exported packing file");
  verify->callback([&] { rc = dispatch(lqs::run_verify, config); });

  auto* lift = app.add_subcommand("sphere-lift",
                                  "conjugate a planar system onto the hemisphere and compare");
  add_common(lift, config);
  lift->add_option("-q,--q", config.q_list, "q values for the dimension comparison");
  lift->callback([&] { rc = dispatch(lqs::run_sphere_lift, config); });

  CLI11_PARSE(app, argc, argv);
  return rc;
}
