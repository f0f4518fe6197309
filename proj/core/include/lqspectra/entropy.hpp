#ifndef LQSPECTRA_ENTROPY_HPP
#define LQSPECTRA_ENTROPY_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lqspectra/measure.hpp"
#include "lqspectra/packing.hpp"

namespace lqs {

// Shannon entropy of the partition's cell masses, natural log, with
// 0 log 0 = 0.  The cells must partition the support atoms; a DomainError
// names the overlapping or missing atom otherwise.
double partition_entropy(const AtomicMeasure& mu,
                         const std::vector<std::vector<std::uint32_t>>& cells);

// Upper bound on the infimum of partition entropies over maximal
// 4*2^-t-partitions: the minimum over `restarts` candidates built from
// heavy packings at radius 2^-t (candidate 0 deterministic, the rest with
// seeded near-argmax tie randomization).
double h_star_t(const AtomicMeasure& mu, int t, int restarts, std::uint64_t seed);

// Least-squares slope of h*_t against t log 2 over the level grid.
double entropy_dimension(const AtomicMeasure& mu, std::span<const int> t_grid, int restarts,
                         std::uint64_t seed);

// -sum_a m_a log mu(B_{2^-t}(a)), the log-ball integral the h* values track
// up to an additive constant.
double ball_log_integral(const AtomicMeasure& mu, int t);

struct EntropyTrace {
  std::vector<int> t_grid;
  std::vector<double> h_star;
  std::vector<double> ball_log;
  double dim_e_hat = 0.0;
  double doubling_c_hat = 1.0;
};

EntropyTrace build_entropy_trace(const AtomicMeasure& mu, std::span<const int> t_grid,
                                 int restarts, std::uint64_t seed);

struct SuperadditivityReport {
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> defects;  // h*_s + h*_t - h*_{s+t}
  double l_hat = 0.0;           // max(0, worst defect)
};

// Minimal L with h*_{s+t} >= h*_s + h*_t - L over the probed level pairs.
SuperadditivityReport superadditivity_check(const AtomicMeasure& mu, std::span<const int> levels,
                                            int restarts, std::uint64_t seed);

struct DoublingGate {
  bool ok = true;
  DoublingConstantEstimate estimate;
  std::string message;
};

// Entropy estimators assume a doubling measure; this probe refuses when the
// per-scale doubling ratios drift upward without bound toward small scales
// (strictly increasing across the whole probed window with total growth
// at least 4x).
DoublingGate doubling_gate(const AtomicMeasure& mu, int probes = 256);

}  // namespace lqs

#endif
