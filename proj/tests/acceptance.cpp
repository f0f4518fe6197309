// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion.  Exit code = failure count.
//
// Usage: acceptance <data-dir>   (the bundled spec fixtures)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lqspectra/entropy.hpp"
#include "lqspectra/io.hpp"
#include "lqspectra/manifolds.hpp"
#include "lqspectra/run.hpp"
#include "lqspectra/spectra.hpp"

using namespace lqs;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  if (!pass) ++g_failures;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream ss;
  ss.precision(prec);
  ss << std::fixed << v;
  return ss.str();
}

constexpr double kDimCantor = 0.6309297535714574;  // log 2 / log 3

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <data-dir>\n");
    return 64;
  }
  std::string data = argv[1];
  std::vector<int> t4_10{4, 5, 6, 7, 8, 9, 10};
  std::vector<int> t4_12{4, 5, 6, 7, 8, 9, 10, 11, 12};

  IFSSpec fair = *read_input_file(data + "/cantor_fair.json").ifs;
  IFSSpec biased = *read_input_file(data + "/cantor_biased.json").ifs;

  // ---- Fair-Cantor L^q dimensions: depth-12 atoms, t in {4..10} ----------
  {
    double t0 = now_seconds();
    AtomicMeasure mu = attractor_atoms(fair, std::pow(2.0, -18));
    std::vector<double> qs{0.5, 2.0, 3.0};
    SpectrumTable table = build_spectrum_table(mu, qs, t4_10, 0.5);
    double worst = 0.0;
    std::string dims;
    for (const QFit& fit : table.fits) {
      worst = std::max(worst, std::abs(fit.dim_hat - kDimCantor));
      dims += " dim(" + fmt(fit.q, 1) + ")=" + fmt(fit.dim_hat);
    }
    double elapsed = now_seconds() - t0;
    report("fair-cantor L^q dimension (q in {0.5,2,3})",
           mu.size() == 4096 && worst <= 0.05 && elapsed < 60.0,
           "atoms=" + std::to_string(mu.size()) + dims + " worst_err=" + fmt(worst) +
               " oracle=" + fmt(kDimCantor) + " runtime=" + fmt(elapsed, 1) + "s");
  }

  // ---- Biased-Cantor tau(2) and entropy dimension -------------------------
  {
    double t0 = now_seconds();
    AtomicMeasure mu = attractor_atoms(biased, std::pow(2.0, -18));
    std::vector<double> qs{2.0};
    SpectrumTable table = build_spectrum_table(mu, qs, t4_10, 0.5);
    double tau_oracle = moran_tau(std::vector<double>{0.25, 0.75},
                                  std::vector<double>{1.0 / 3, 1.0 / 3}, 2.0);
    double tau_err = std::abs(table.fits[0].tau_hat - 0.4278);

    double dim_e = entropy_dimension(mu, t4_10, 8, 0);
    double dim_e_err = std::abs(dim_e - 0.5118);
    double elapsed = now_seconds() - t0;
    report("biased-cantor tau(2) and entropy dimension",
           tau_err <= 0.05 && dim_e_err <= 0.05 && std::abs(tau_oracle - 0.4278) < 1e-3 &&
               elapsed < 120.0,
           "tau_hat=" + fmt(table.fits[0].tau_hat) + " (oracle " + fmt(tau_oracle) + ")" +
               " dim_e_hat=" + fmt(dim_e) + " (oracle 0.5118)" + " runtime=" + fmt(elapsed, 1) +
               "s");
  }

  // ---- Equivalence of the packing and integral dimensions ----------------
  {
    bool pass = true;
    std::string detail;
    for (const IFSSpec* spec : {&fair, &biased}) {
      AtomicMeasure mu = attractor_atoms(*spec, std::pow(2.0, -20));
      std::vector<double> qs{0.5, 2.0};
      SpectrumTable table = build_spectrum_table(mu, qs, t4_12, 0.5);
      for (const QFit& fit : table.fits) {
        double gap = std::abs(fit.dim_hat - fit.gd_dim);
        pass = pass && gap <= 0.05;
        detail += " gap(" + std::string(spec == &fair ? "fair" : "biased") + ",q=" +
                  fmt(fit.q, 1) + ")=" + fmt(gap);
      }
    }
    report("packing vs integral dimension equivalence", pass, detail.substr(1));
  }

  // ---- Heavy-packing sandwich against sampled packings --------------------
  {
    AtomicMeasure mu = attractor_atoms(fair, std::pow(2.0, -18));
    std::vector<double> ratios;
    bool lower_ok = true;
    for (int t = 4; t <= 8; ++t) {
      double delta = std::pow(2.0, -t);
      std::vector<double> bm = atom_ball_masses(mu, delta);
      auto sum2 = [&](const Packing& p) {
        double s = 0.0;
        for (std::uint32_t c : p.center_ids) s += bm[c] * bm[c];
        return s;
      };
      double s_star = sum2(heavy_maximal_packing(mu, delta, bm));
      double best = s_star;
      for (int k = 0; k < 100; ++k)
        best = std::max(best, sum2(random_maximal_packing(mu, delta, 1000 + 101 * k + t)));
      lower_ok = lower_ok && s_star <= best * (1.0 + 1e-12);
      ratios.push_back(best / s_star);
    }
    double mean = 0.0;
    for (double r : ratios) mean += r;
    mean /= static_cast<double>(ratios.size());
    bool stable = true;
    std::string detail = "ratios";
    for (double r : ratios) {
      stable = stable && std::abs(r - mean) <= 0.25 * mean;
      detail += " " + fmt(r);
    }
    report("heavy-packing sandwich (q=2, t=4..8)", lower_ok && stable,
           detail + " (each within 25% of mean " + fmt(mean) + ")");
  }

  // ---- Grid-sum vs packing-sum band ---------------------------------------
  {
    AtomicMeasure mu = attractor_atoms(fair, std::pow(2.0, -18));
    bool pass = true;
    std::string detail;
    for (double q : {0.5, 2.0}) {
      double lo = 1e300, hi = 0.0;
      for (int t = 4; t <= 8; ++t) {
        double delta = std::pow(2.0, -t);
        double ratio = renyi_sum(mu, 0.5, delta, q) / packing_sum(mu, delta, q);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
      pass = pass && hi / lo <= 10.0;
      detail += " band(q=" + fmt(q, 1) + ")=" + fmt(hi / lo, 2);
    }
    report("grid/packing sum band (t=4..8)", pass, detail.substr(1) + " <= 10");
  }

  // ---- Sub/super-multiplicativity stability --------------------------------
  {
    AtomicMeasure mu = attractor_atoms(fair, std::pow(2.0, -20));
    std::vector<int> w1{5, 6, 7}, w2{6, 7, 8};
    bool pass = true;
    std::string detail;
    for (double q : {2.0, 0.5}) {
      MultiplicativityReport r1 = multiplicativity_check(mu, q, w1, 8, 0);
      MultiplicativityReport r2 = multiplicativity_check(mu, q, w2, 8, 0);
      bool finite = std::isfinite(r1.l_hat) && std::isfinite(r2.l_hat);
      bool stable = std::abs(r1.l_hat - r2.l_hat) <= 0.25 * std::max(r1.l_hat, r2.l_hat);
      pass = pass && finite && stable;
      detail += " q=" + fmt(q, 1) + ": L=" + fmt(r1.l_hat) + "/" + fmt(r2.l_hat);
    }
    report("multiplicativity constants stable under window shift", pass, detail.substr(1));
  }

  // ---- Entropy machinery ----------------------------------------------------
  {
    AtomicMeasure mu = attractor_atoms(fair, std::pow(2.0, -18));
    std::vector<double> scales;
    for (int t = 4; t <= 9; ++t) scales.push_back(std::pow(2.0, -t));
    double c_hat = mu.doubling_constant(scales, 256).c_hat;
    double allowance = std::pow(c_hat, std::log2(10.0));

    bool steps_ok = true;
    std::vector<double> h(11, 0.0);
    for (int t = 4; t <= 10; ++t) h[t] = h_star_t(mu, t, 8, 0);
    for (int t = 5; t <= 10; ++t) steps_ok = steps_ok && h[t] <= h[t - 1] + allowance;

    double glo = 1e300, ghi = -1e300;
    for (int t = 4; t <= 9; ++t) {
      double gap = std::abs(h[t] - ball_log_integral(mu, t));
      glo = std::min(glo, gap);
      ghi = std::max(ghi, gap);
    }
    bool gap_ok = ghi - glo <= 2.0;

    std::vector<int> levels{3, 4, 5};
    SuperadditivityReport super = superadditivity_check(mu, levels, 8, 0);
    bool super_ok = std::isfinite(super.l_hat) && super.l_hat >= 0.0;

    report("entropy machinery (step allowance, log-ball gap, superadditivity)",
           steps_ok && gap_ok && super_ok,
           "allowance=" + fmt(allowance, 1) + " gap_band=" + fmt(ghi - glo) + " (<=2)" +
               " L_super=" + fmt(super.l_hat));
  }

  // ---- Sphere lift ----------------------------------------------------------
  {
    IFSSpec disk = *read_input_file(data + "/disk_cantor.json").ifs;
    auto chart = std::make_shared<StereographicChart>(2);

    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double worst_rt = 0.0;
    int tested = 0;
    while (tested < 10000) {
      Vec u{unif(rng) * 0.9, unif(rng) * 0.9};
      if (u[0] * u[0] + u[1] * u[1] >= 0.81) continue;
      ++tested;
      Vec round = chart->forward(chart->inverse(u));
      worst_rt = std::max({worst_rt, std::abs(round[0] - u[0]), std::abs(round[1] - u[1])});
    }
    bool roundtrip_ok = worst_rt <= 1e-10;

    AtomicMeasure planar = attractor_atoms(disk, std::pow(2.0, -18));
    AtomicMeasure lifted = planar.pushforward(StereographicLift(chart));

    std::vector<Ball> probe_balls;
    for (std::size_t a = 0; a < lifted.size(); a += lifted.size() / 16)
      for (double r : {0.02, 0.05})
        probe_balls.push_back(make_ball(Vec(lifted.position(a).begin(),
                                            lifted.position(a).end()), r));
    DistortionBand band = distortion_probe(*chart, probe_balls, 64);
    bool band_ok = band.sphere_to_plane_lo() >= 1.0 - 1e-9 &&
                   band.sphere_to_plane_hi() <= 2.0 + 1e-9;

    std::vector<double> qs{2.0};
    SpectrumTable pt = build_spectrum_table(planar, qs, t4_10, 0.5);
    SpectrumTable st = build_spectrum_table(lifted, qs, t4_10, 0.5);
    double gap = std::abs(pt.fits[0].dim_hat - st.fits[0].dim_hat);
    bool dim_ok = gap <= 0.05;

    std::vector<double> transfer_scales{1.0 / 16, 1.0 / 32, 1.0 / 64};
    DoublingTransferReport transfer =
        doubling_transfer_check(planar, chart, transfer_scales, 256);

    report("sphere lift (round trip, distortion band, dim_2, doubling transfer)",
           roundtrip_ok && band_ok && dim_ok && transfer.holds,
           "roundtrip<=" + fmt(worst_rt, 12) + " band=[" + fmt(band.sphere_to_plane_lo()) + "," +
               fmt(band.sphere_to_plane_hi()) + "] dim_gap=" + fmt(gap) + " transfer c_sphere=" +
               fmt(transfer.c_sphere) + "<=" + fmt(transfer.bound));
  }

  // ---- Power-sum inequality sweep -------------------------------------------
  {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int violations = 0;
    for (int k = 0; k < 10000; ++k) {
      int n = 1 + static_cast<int>(unif(rng) * 16);
      std::vector<double> values(n);
      for (double& v : values) v = unif(rng) * 5.0;
      double q = 1e-9 + unif(rng) * 4.0;
      if (!powersum_check(values, q)) ++violations;
    }
    report("power-sum inequality sweep (10^4 random instances)", violations == 0,
           std::to_string(violations) + " violations");
  }

  // ---- Covering probe bounded on the fair-Cantor support --------------------
  {
    AtomicMeasure mu = attractor_atoms(fair, std::pow(2.0, -18));
    int worst = 0;
    for (int s = 3; s <= 8; ++s) {
      double r = std::pow(2.0, -s - 1);
      worst = std::max(worst, covering_probe(mu.space(), mu.positions(), 2.0 * r, r));
    }
    report("covering numbers uniformly bounded (scales 2^-3..2^-8)", worst <= 5,
           "max greedy 2r-ball cover = " + std::to_string(worst) + " (<= 5)");
  }

  // ---- Determinism ----------------------------------------------------------
  {
    auto tmp = std::filesystem::temp_directory_path();
    RunConfig config;
    config.spec_path = data + "/cantor_fair.json";
    config.t_min = 4;
    config.t_max = 8;
    config.q_list = {0.5, 2.0};
    config.seed = 424242;
    config.restarts = 4;

    RunConfig a = config, b = config;
    a.out_dir = (tmp / "lqspectra_acc_a").string();
    b.out_dir = (tmp / "lqspectra_acc_b").string();
    run_spectrum(a);
    run_spectrum(b);
    run_entropy(a);
    run_entropy(b);
    bool same = slurp(a.out_dir + "/spectrum.csv") == slurp(b.out_dir + "/spectrum.csv") &&
                slurp(a.out_dir + "/spectrum.json") == slurp(b.out_dir + "/spectrum.json") &&
                slurp(a.out_dir + "/entropy.csv") == slurp(b.out_dir + "/entropy.csv");
    report("determinism: identical seed, byte-identical outputs", same,
           same ? "spectrum.csv, spectrum.json, entropy.csv identical" : "outputs differ");
  }

  std::printf("%d criteria failed\n", g_failures);
  return g_failures;
}
