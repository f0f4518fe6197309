#ifndef LQSPECTRA_RUN_HPP
#define LQSPECTRA_RUN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "lqspectra/spectra.hpp"

namespace lqs {

// Shared configuration for the command pipelines.  All randomness flows
// from the single 64-bit seed.
struct RunConfig {
  std::string spec_path;
  std::string out_dir = ".";
  std::vector<double> q_list = {0.25, 0.5, 0.75, 1.5, 2.0, 3.0, 4.0};
  int t_min = 4;
  int t_max = 10;
  double lambda = 0.5;
  int restarts = 8;
  double delta_atom = 0.0;  // 0: auto, 2^-(t_max + 8)
  std::uint64_t word_budget = 2'000'000;
  std::uint64_t seed = 0;
  bool force = false;  // bypass the doubling gate in the entropy pipeline
  FitMethod fit = FitMethod::LeastSquares;
  int fit_window = 0;  // 0: fit over every scale in the table
  double pack_delta = 1.0 / 16.0;
  std::string packing_csv;  // verify: externally supplied packing to audit
  int probes = 256;
};

struct CommandResult {
  int exit_code = 0;
  std::vector<std::string> summary;
};

CommandResult run_spectrum(const RunConfig& config);
CommandResult run_entropy(const RunConfig& config);
CommandResult run_pack(const RunConfig& config);
CommandResult run_verify(const RunConfig& config);
CommandResult run_sphere_lift(const RunConfig& config);

}  // namespace lqs

#endif
