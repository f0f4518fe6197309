#include <cmath>
#include <map>

#include "doctest.h"
#include "support.hpp"

using namespace lqs;
using namespace testsup;

namespace {
constexpr double kDimCantor = 0.6309297535714574;
// (sum p log p) / (sum p log r) for p = (1/4, 3/4), r = 1/3.
constexpr double kBiasedEntropyDim = 0.5118595071;
}  // namespace

TEST_SUITE("entropy") {

TEST_CASE("partition entropy closed forms") {
  AtomicMeasure mu = attractor_atoms(cantor(0.25), 1.0 / 9.0);
  REQUIRE(mu.size() == 4);

  SUBCASE("one cell has zero entropy") {
    std::vector<std::vector<std::uint32_t>> cells{{0, 1, 2, 3}};
    CHECK(partition_entropy(mu, cells) == doctest::Approx(0.0));
  }

  SUBCASE("an even split gives log 2") {
    AtomicMeasure fair = attractor_atoms(cantor(), 1.0 / 3.0);
    std::vector<std::vector<std::uint32_t>> cells{{0}, {1}};
    CHECK(partition_entropy(fair, cells) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }

  SUBCASE("the biased second generation") {
    std::vector<std::vector<std::uint32_t>> cells{{0}, {1}, {2}, {3}};
    CHECK(partition_entropy(mu, cells) == doctest::Approx(1.1246703).epsilon(1e-6));
  }

  SUBCASE("non-partitions are rejected with witnesses") {
    std::vector<std::vector<std::uint32_t>> overlap{{0, 1}, {1, 2, 3}};
    CHECK_THROWS_WITH_AS(partition_entropy(mu, overlap), doctest::Contains("overlap"),
                         DomainError);
    std::vector<std::vector<std::uint32_t>> missing{{0, 1}, {3}};
    CHECK_THROWS_WITH_AS(partition_entropy(mu, missing), doctest::Contains("missing"),
                         DomainError);
  }
}

TEST_CASE("h* candidates") {
  AtomicMeasure mu = attractor_atoms(cantor(), std::pow(2.0, -18));

  SUBCASE("one restart is the deterministic heavy partition") {
    double h1 = h_star_t(mu, 6, 1, 12345);
    MaximalPartition part =
        maximal_partition(heavy_maximal_packing(mu, std::pow(2.0, -6)), mu);
    CHECK(h1 == doctest::Approx(partition_entropy(mu, part.cells)).epsilon(1e-14));
  }

  SUBCASE("more restarts never increase the minimum") {
    for (int t : {5, 7}) {
      CHECK(h_star_t(mu, t, 8, 7) <= h_star_t(mu, t, 1, 7) + 1e-12);
      CHECK(h_star_t(mu, t, 8, 7) <= h_star_t(mu, t, 4, 7) + 1e-12);
    }
  }

  SUBCASE("normalized values approach the entropy dimension") {
    // Per-level ratios carry the additive O(1)/(t log 2) bias of the
    // infimum (at t = 9 the best maximal partition sits near log 32, ratio
    // 0.556), so the band here is wider than the slope estimator's; the
    // slope tests below hold +-0.05.
    for (int t : {8, 9, 10}) {
      double v = h_star_t(mu, t, 8, 7) / (t * std::log(2.0));
      CHECK(std::abs(v - kDimCantor) <= 0.1);
    }
  }

  SUBCASE("entropy bounds hold for every generated partition") {
    for (int t : {4, 6, 8}) {
      MaximalPartition part =
          maximal_partition(heavy_maximal_packing(mu, std::pow(2.0, -t)), mu);
      double h = partition_entropy(mu, part.cells);
      CHECK(h >= 0.0);
      CHECK(h <= std::log(double(part.cells.size())) + 1e-12);
    }
  }

  SUBCASE("the scale floor is enforced") {
    AtomicMeasure coarse = attractor_atoms(cantor(), 1.0 / 27.0);
    CHECK_THROWS_AS(h_star_t(coarse, 9, 1, 0), DomainError);
  }
}

TEST_CASE("scale-step allowance") {
  AtomicMeasure mu = attractor_atoms(cantor(), std::pow(2.0, -18));
  std::vector<double> scales;
  for (int t = 4; t <= 9; ++t) scales.push_back(std::pow(2.0, -t));
  double c_hat = mu.doubling_constant(scales, 256).c_hat;
  double allowance = std::pow(c_hat, std::log2(10.0));
  double prev = h_star_t(mu, 4, 8, 7);
  for (int t = 5; t <= 10; ++t) {
    double cur = h_star_t(mu, t, 8, 7);
    CHECK(cur <= prev + allowance);
    prev = cur;
  }
}

TEST_CASE("entropy dimension estimates") {
  std::vector<int> ts{4, 5, 6, 7, 8, 9, 10};
  CHECK(std::abs(entropy_dimension(attractor_atoms(cantor(), std::pow(2.0, -18)), ts, 8, 7) -
                 kDimCantor) <= 0.05);
  CHECK(std::abs(entropy_dimension(attractor_atoms(cantor(0.25), std::pow(2.0, -18)), ts, 8, 7) -
                 kBiasedEntropyDim) <= 0.05);
  CHECK(std::abs(entropy_dimension(attractor_atoms(uniform_half(), std::pow(2.0, -13)), ts, 8, 7) -
                 1.0) <= 0.05);

  std::vector<int> short_grid{4, 5};
  CHECK_THROWS_AS(
      entropy_dimension(attractor_atoms(cantor(), std::pow(2.0, -12)), short_grid, 2, 0),
      DomainError);
}

TEST_CASE("log-ball integral") {
  SUBCASE("a single atom integrates to zero") {
    AtomicMeasure one = point_masses(Space::euclidean(1), {{0.5}}, {1.0}, 1e-9);
    CHECK(ball_log_integral(one, 4) == doctest::Approx(0.0));
  }

  SUBCASE("two far atoms give log 2") {
    AtomicMeasure two = point_masses(Space::euclidean(1), {{0.0}, {1.0}}, {0.5, 0.5}, 1e-9);
    CHECK(ball_log_integral(two, 4) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }

  SUBCASE("the h* gap stays in a uniform band") {
    AtomicMeasure mu = attractor_atoms(cantor(), std::pow(2.0, -18));
    double lo = 1e300, hi = -1e300;
    for (int t = 4; t <= 9; ++t) {
      double gap = std::abs(h_star_t(mu, t, 8, 7) - ball_log_integral(mu, t));
      lo = std::min(lo, gap);
      hi = std::max(hi, gap);
    }
    CHECK(hi - lo <= 2.0);
  }
}

TEST_CASE("superadditivity of h*") {
  SUBCASE("an exactly linear sequence has zero defect") {
    double c = 0.63;
    auto h = [&](int t) { return c * t; };
    double l_hat = 0.0;
    for (int s : {3, 4, 5})
      for (int t : {3, 4, 5}) l_hat = std::max(l_hat, h(s) + h(t) - h(s + t));
    CHECK(l_hat == 0.0);
  }

  AtomicMeasure mu = attractor_atoms(cantor(), std::pow(2.0, -18));
  std::vector<int> w1{3, 4, 5}, w2{4, 5, 6};
  SuperadditivityReport r1 = superadditivity_check(mu, w1, 8, 7);
  SuperadditivityReport r2 = superadditivity_check(mu, w2, 8, 7);
  CHECK(r1.l_hat >= 0.0);
  CHECK(std::isfinite(r1.l_hat));
  CHECK(std::isfinite(r2.l_hat));
  CHECK(std::abs(r1.l_hat - r2.l_hat) <= 0.2 * std::max(r1.l_hat, r2.l_hat) + 0.2);

  AtomicMeasure lebesgue = attractor_atoms(uniform_half(), std::pow(2.0, -13));
  CHECK(std::isfinite(superadditivity_check(lebesgue, w1, 4, 7).l_hat));

  AtomicMeasure coarse = attractor_atoms(cantor(), 1.0 / 81.0);
  CHECK_THROWS_AS(superadditivity_check(coarse, w2, 2, 0), DomainError);
}

TEST_CASE("coarse partitions never beat the h* family") {
  // h(mu, 8*delta) <= h*_t for 2^-t-1 <= delta < 2^-t, with the candidate
  // family enriched by grids and coarser maximal partitions.
  AtomicMeasure mu = attractor_atoms(cantor(), std::pow(2.0, -18));
  int t = 5;
  double delta = 0.75 * std::pow(2.0, -t);
  double h_star = h_star_t(mu, t, 8, 7);

  double best = 1e300;
  for (int r = 0; r < 4; ++r) {
    Packing p = r == 0 ? heavy_maximal_packing(mu, 2.0 * delta)
                       : heavy_maximal_packing_randomized(mu, 2.0 * delta, 1000 + r);
    best = std::min(best, partition_entropy(mu, maximal_partition(p, mu).cells));
  }
  GridPartition grid = grid_partition(mu, 0.5, 4.0 * delta);
  best = std::min(best, partition_entropy(mu, grid.cells));
  CHECK(best <= h_star + 1e-12);
}

TEST_CASE("refining a cylinder partition cannot lower its entropy") {
  IFSSpec spec = cantor(0.25);
  AtomizeResult res = attractor_atoms_detailed(spec, std::pow(2.0, -14));
  REQUIRE_FALSE(res.merged);

  auto prefix_cells = [&](std::size_t len) {
    std::map<std::vector<std::uint8_t>, std::vector<std::uint32_t>> groups;
    for (std::uint32_t i = 0; i < res.measure.size(); ++i) {
      auto symbols = res.cut.words[res.atom_word[i]].symbols;
      symbols.resize(std::min(len, symbols.size()));
      groups[symbols].push_back(i);
    }
    std::vector<std::vector<std::uint32_t>> cells;
    for (auto& [key, ids] : groups) cells.push_back(ids);
    return cells;
  };

  double h3 = partition_entropy(res.measure, prefix_cells(3));
  double h4 = partition_entropy(res.measure, prefix_cells(4));
  CHECK(h4 >= h3 - 1e-12);
}

TEST_CASE("doubling gate") {
  SUBCASE("self-similar measures pass") {
    CHECK(doubling_gate(attractor_atoms(cantor(), std::pow(2.0, -18))).ok);
    CHECK(doubling_gate(attractor_atoms(cantor(0.25), std::pow(2.0, -18))).ok);
  }

  SUBCASE("super-geometric decay trips the gate") {
    DoublingGate gate = doubling_gate(nondoubling_measure());
    CHECK_FALSE(gate.ok);
    CHECK(gate.message.find("doubling") != std::string::npos);
  }
}

}  // TEST_SUITE
