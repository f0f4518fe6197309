#ifndef LQSPECTRA_SPECTRA_HPP
#define LQSPECTRA_SPECTRA_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "lqspectra/ifs.hpp"
#include "lqspectra/measure.hpp"
#include "lqspectra/packing.hpp"

namespace lqs {

// Sum of mu(B_delta(x_j))^q over the deterministic heavy maximal
// delta-packing; a constant-factor proxy for the supremum over all
// delta-packings.
double packing_sum(const AtomicMeasure& mu, double delta, double q);
BallMass packing_sum_with_error(const AtomicMeasure& mu, double delta, double q);

// The S* estimator: max of the power sum over `restarts` heavy maximal
// packings (restart 0 deterministic, the rest near-argmax randomized).
// The sup defining S* ranges over all heavy maximal packings; a single
// greedy packing aliases against dyadic scale grids, the max over several
// does not.
double packing_sum_sup(const AtomicMeasure& mu, double delta, double q, int restarts,
                       std::uint64_t seed);

// Sum of mu(P_i)^q over the (lambda, delta)-grid partition.
double renyi_sum(const AtomicMeasure& mu, double lambda, double delta, double q);

enum class FitMethod { Endpoint, LeastSquares };

struct SpectrumEntry {
  double q = 0.0;
  int t = 0;
  double s_heavy = 0.0;
  double s_grid = 0.0;
  double i_gd = 0.0;        // NaN at q = 1
  double error_bound = 0.0; // worst relative shell mass over the packing balls
};

struct QFit {
  double q = 0.0;
  double tau_hat = 0.0;
  double residual = 0.0;
  double dim_hat = 0.0;  // NaN at q = 1
  double gd_dim = 0.0;   // NaN outside q in (0, inf) \ {1}
};

struct SpectrumTable {
  std::vector<double> q_grid;
  std::vector<int> t_grid;  // ascending
  std::vector<SpectrumEntry> entries;  // q-major, t ascending within q
  std::vector<QFit> fits;
  double lambda = 0.5;

  const SpectrumEntry& at(std::size_t qi, std::size_t ti) const {
    return entries[qi * t_grid.size() + ti];
  }
};

// Default q grid used by the pipelines: diagnostics {0, 1} plus
// {0.25, 0.5, 0.75, 1.5, 2, 3, 4}.
std::vector<double> default_q_grid();

SpectrumTable build_spectrum_table(const AtomicMeasure& mu, std::span<const double> q_grid,
                                   std::span<const int> t_grid, double lambda,
                                   FitMethod method = FitMethod::LeastSquares, int fit_window = 0,
                                   int heavy_restarts = 8, std::uint64_t seed = 0);

// Scaling exponent of the packing sums: endpoint takes the deepest scale,
// least squares fits log S against -t log 2 over the `window` deepest
// scales (window <= 0 or beyond the grid uses every scale; the default,
// since dyadic windows shorter than the lattice period of a self-similar
// system alias badly).  The residual is the worst deviation of the
// consecutive two-point slopes from the fit.
std::pair<double, double> tau_fit(const SpectrumTable& table, double q, FitMethod method,
                                  int window = 0);

// tau / (q - 1); q = 1 is a DomainError.
double dimension_q(double tau_hat, double q);

// Slope fit of log lq_sum against (q-1) log delta over the given scales.
double gd_dimension(const AtomicMeasure& mu, double q, std::span<const double> scales);

// Discrete Legendre transform: tau*(alpha) = min over the q grid of
// alpha q - tau(q), sampled on alpha_grid.
std::vector<std::pair<double, double>> legendre(std::span<const double> q_grid,
                                                std::span<const double> tau_values,
                                                std::span<const double> alpha_grid);

struct MultiplicativityReport {
  double q = 0.0;
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> defects;  // signed log defect per pair, direction-adjusted
  double l_hat = 1.0;           // direction dictated by q
  double l_hat_sub = 1.0;       // a_{s+t} <= a_s + a_t + log L
  double l_hat_super = 1.0;     // a_{s+t} >= a_s + a_t - log L
  bool submultiplicative_direction = true;
};

// Minimal L with the sub- (q >= 1) or super- (0 < q < 1) multiplicative
// defect of a_t = log S_heavy(2^-t, q) over all probed (s, t) pairs, with
// S_heavy the same sup estimator the spectrum table uses.
MultiplicativityReport multiplicativity_check(const AtomicMeasure& mu, double q,
                                              std::span<const int> levels, int heavy_restarts = 8,
                                              std::uint64_t seed = 0);

struct CutMassProfile {
  int t = 0;
  double q = 0.0;
  int s = 0;
  double ball_radius = 0.0;  // doubled packing balls: 2 * 2^-t
  std::vector<std::uint32_t> ball_center_ids;
  std::vector<double> p_plus;
  std::vector<double> p_minus;
};

// Cut-word mass profile over the doubled balls of a 2^-t packing: p_plus
// counts every word whose cylinder can touch the doubled ball (inflated
// representative test), p_minus assigns each word to the ball maximizing
// the pulled-back partition power sum w(u, B) (ties to the lowest ball).
CutMassProfile cut_mass_profile(const AtomicMeasure& mu, const IFSSpec& spec, int t,
                                const Packing& packing, double q, int s = 3);

// The unique tau with sum_i p_i^q r_i^(-tau) = 1, by bisection to 1e-12.
// Closed-form oracle for self-similar measures under strong separation.
double moran_tau(std::span<const double> probs, std::span<const double> ratios, double q);

// (sum a_i)^q <= max(k^(q-1), 1) * sum a_i^q for nonnegative a.
bool powersum_check(std::span<const double> values, double q);

}  // namespace lqs

#endif
