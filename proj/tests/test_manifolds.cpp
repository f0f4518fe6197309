#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"

using namespace lqs;
using namespace testsup;

TEST_SUITE("manifolds") {

TEST_CASE("stereographic chart closed forms") {
  StereographicChart chart(2);

  SUBCASE("the south pole maps to the origin") {
    Vec u = chart.forward(Vec{0, 0, -1});
    CHECK(u[0] == 0.0);
    CHECK(u[1] == 0.0);
    Vec x = chart.inverse(Vec{0, 0});
    CHECK(x[0] == 0.0);
    CHECK(x[1] == 0.0);
    CHECK(x[2] == -1.0);
  }

  SUBCASE("lifted points are unit vectors") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int k = 0; k < 10000; ++k) {
      Vec u{unif(rng) * 0.7, unif(rng) * 0.7};
      if (u[0] * u[0] + u[1] * u[1] >= 1.0) continue;
      Vec x = chart.inverse(u);
      CHECK(std::abs(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - 1.0) <= 1e-12);
    }
  }

  SUBCASE("round trips are exact to 1e-10") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int k = 0; k < 10000; ++k) {
      Vec u{unif(rng) * 0.95, unif(rng) * 0.95};
      if (u[0] * u[0] + u[1] * u[1] >= 0.9) continue;
      Vec round = chart.forward(chart.inverse(u));
      CHECK(std::abs(round[0] - u[0]) <= 1e-10);
      CHECK(std::abs(round[1] - u[1]) <= 1e-10);
    }
  }

  SUBCASE("equator and boundary inputs are rejected") {
    CHECK_THROWS_AS(chart.forward(Vec{1, 0, 0}), DomainError);
    CHECK_THROWS_AS(chart.forward(Vec{0, 0, 1}), DomainError);
    CHECK_THROWS_AS(chart.inverse(Vec{1.0, 0.0}), DomainError);
  }

  SUBCASE("scale factors match finite differences") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    CHECK(chart.forward_scale(Vec{0, 0, -1}) == doctest::Approx(0.5));
    CHECK(chart.inverse_scale(Vec{0, 0}) == doctest::Approx(2.0));
    for (int k = 0; k < 20; ++k) {
      Vec u{unif(rng), unif(rng)};
      double h = 1e-7;
      Vec x0 = chart.inverse(u);
      Vec x1 = chart.inverse(Vec{u[0] + h, u[1]});
      double moved = Space::sphere_geodesic(2).distance(x0, x1);
      CHECK(moved / h == doctest::Approx(chart.inverse_scale(u)).epsilon(1e-4));
    }
  }
}

TEST_CASE("conjugation") {
  auto chart = std::make_shared<StereographicChart>(2);
  IFSSpec planar = disk_cantor();
  IFSSpec lifted = conjugate_ifs(planar, chart);

  SUBCASE("pointwise conjugation identity") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unif(-0.19, 0.19);
    for (int i = 0; i < lifted.map_count(); ++i) {
      for (int k = 0; k < 50; ++k) {
        Vec u{unif(rng), unif(rng)};
        Vec lhs = lifted.map(i).apply(chart->inverse(u));
        Vec rhs = chart->inverse(planar.map(i).apply(u));
        for (int c = 0; c < 3; ++c) CHECK(std::abs(lhs[c] - rhs[c]) <= 1e-14);
      }
    }
  }

  SUBCASE("lifted atoms project back onto the planar atoms") {
    AtomicMeasure planar_mu = attractor_atoms(planar, std::pow(2.0, -10));
    AtomicMeasure lifted_mu = planar_mu.pushforward(StereographicLift(chart));
    AtomicMeasure back = lifted_mu.pushforward(StereographicProjection(chart));
    REQUIRE(back.size() == planar_mu.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(std::abs(back.position(i)[0] - planar_mu.position(i)[0]) <= 1e-10);
      CHECK(std::abs(back.position(i)[1] - planar_mu.position(i)[1]) <= 1e-10);
    }
  }

  SUBCASE("the conjugated system atomizes close to the lifted cloud") {
    double delta = 0.4 * std::pow(3.0, -5);
    AtomicMeasure own = attractor_atoms(lifted, delta);
    AtomicMeasure moved = attractor_atoms(planar, delta).pushforward(StereographicLift(chart));
    CHECK(hausdorff_distance(own, moved) <= 2.0 * delta);
  }

  SUBCASE("seeds touching the disk boundary are rejected") {
    std::vector<ConformalMap> maps{ConformalMap::similarity(1.0 / 3.0, {}, {-2.0 / 3.0, 0.0}),
                                   ConformalMap::similarity(1.0 / 3.0, {}, {2.0 / 3.0, 0.0})};
    IFSSpec wide = IFSSpec::create(std::move(maps), {0.5, 0.5}, Space::euclidean(2),
                                   make_ball({0.0, 0.0}, 1.0));
    CHECK_THROWS_WITH_AS(conjugate_ifs(wide, chart), doctest::Contains("blows up"), DomainError);
  }

  SUBCASE("supports crossing the equator margin are rejected") {
    std::vector<ConformalMap> maps{
        ConformalMap::similarity(1.0 / 3.0, {}, {-0.95 * 2.0 / 3.0, 0.0}),
        ConformalMap::similarity(1.0 / 3.0, {}, {0.95 * 2.0 / 3.0, 0.0})};
    IFSSpec wide = IFSSpec::create(std::move(maps), {0.5, 0.5}, Space::euclidean(2),
                                   make_ball({0.0, 0.0}, 0.95));
    CHECK_THROWS_AS(conjugate_ifs(wide, chart), DomainError);
  }
}

TEST_CASE("distortion probes") {
  StereographicChart chart(2);

  SUBCASE("near-pole balls stay within the factor-2 band") {
    std::vector<Ball> balls;
    for (double r : {0.02, 0.05, 0.1}) {
      balls.push_back(make_ball({0.0, 0.0, -1.0}, r));
      balls.push_back(make_ball({0.3, 0.0, -std::sqrt(1.0 - 0.09)}, r));
    }
    DistortionBand band = distortion_probe(chart, balls, 128);
    CHECK(band.d1 <= band.d2);
    CHECK(band.sphere_to_plane_lo() >= 1.0 - 1e-9);
    CHECK(band.sphere_to_plane_hi() <= 2.0 + 1e-9);
  }

  SUBCASE("the vanishing-radius limit at the pole is the Jacobian ratio 2") {
    std::vector<Ball> balls{make_ball({0.0, 0.0, -1.0}, 1e-5)};
    DistortionBand band = distortion_probe(chart, balls, 64);
    CHECK(band.sphere_to_plane_lo() == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(band.sphere_to_plane_hi() == doctest::Approx(2.0).epsilon(1e-4));
  }

  SUBCASE("margin violations are rejected") {
    std::vector<Ball> balls{make_ball({std::sqrt(1.0 - 0.0025), 0.0, -0.05}, 0.02)};
    CHECK_THROWS_AS(distortion_probe(chart, balls, 16), DomainError);
  }
}

TEST_CASE("doubling transfer") {
  auto chart = std::make_shared<StereographicChart>(2);

  SUBCASE("identity pushforwards keep the constants") {
    AtomicMeasure planar = attractor_atoms(disk_cantor(), std::pow(2.0, -14));
    AtomicMeasure same = planar.pushforward(IdentityMap(planar.space()));
    std::vector<double> scales{1.0 / 32, 1.0 / 64};
    CHECK(planar.doubling_constant(scales, 128).c_hat ==
          doctest::Approx(same.doubling_constant(scales, 128).c_hat));
  }

  SUBCASE("the middle-thirds lift satisfies the transfer bound") {
    AtomicMeasure planar = attractor_atoms(disk_cantor(), std::pow(2.0, -14));
    std::vector<double> scales{1.0 / 16, 1.0 / 32, 1.0 / 64};
    DoublingTransferReport report = doubling_transfer_check(planar, chart, scales, 128);
    CHECK(report.holds);
    CHECK(report.band.d1 >= 0.5 - 1e-9);
    CHECK(report.band.d2 <= 1.0 + 1e-9);
    CHECK(report.m == 1);
    CHECK(report.bound == doctest::Approx(report.c_plane * report.c_plane));
    CHECK(report.c_sphere <= report.bound * (1.0 + 1e-9));
  }

  SUBCASE("an interval measure lifts with the bound intact") {
    std::vector<ConformalMap> maps{ConformalMap::similarity(0.5, {}, {-0.1, 0.0}),
                                   ConformalMap::similarity(0.5, {}, {0.1, 0.0})};
    IFSSpec segment = IFSSpec::create(std::move(maps), {0.5, 0.5}, Space::euclidean(2),
                                      make_ball({0.0, 0.0}, 0.2));
    AtomicMeasure planar = attractor_atoms(segment, std::pow(2.0, -14));
    std::vector<double> scales{1.0 / 32, 1.0 / 64};
    CHECK(doubling_transfer_check(planar, chart, scales, 128).holds);
  }
}

TEST_CASE("the circle chart works in dimension one") {
  auto chart = std::make_shared<StereographicChart>(1);
  // Middle-thirds system on the segment [-0.2, 0.2] of the 1-disk.
  std::vector<ConformalMap> maps{ConformalMap::similarity(1.0 / 3.0, {}, {-2.0 / 15.0}),
                                 ConformalMap::similarity(1.0 / 3.0, {}, {2.0 / 15.0})};
  IFSSpec planar = IFSSpec::create(std::move(maps), {0.5, 0.5}, Space::euclidean(1),
                                   make_ball({0.0}, 0.2));
  IFSSpec lifted = conjugate_ifs(planar, chart);
  CHECK(lifted.space().kind() == Space::Kind::SphereGeodesic);
  CHECK(lifted.space().ambient_dim() == 2);

  AtomicMeasure circle_mu = attractor_atoms(lifted, 0.01);
  CHECK(std::abs(circle_mu.total_mass() - 1.0) <= 1e-12);
  for (std::size_t i = 0; i < circle_mu.size(); ++i) {
    auto p = circle_mu.position(i);
    CHECK(std::abs(p[0] * p[0] + p[1] * p[1] - 1.0) <= 1e-12);
  }

  std::vector<Ball> probes{make_ball({0.0, -1.0}, 0.05)};
  DistortionBand band = distortion_probe(*chart, probes, 32);
  CHECK(band.sphere_to_plane_lo() >= 1.0 - 1e-9);
  CHECK(band.sphere_to_plane_hi() <= 2.0 + 1e-9);
}

TEST_CASE("dimensions survive the lift") {
  auto chart = std::make_shared<StereographicChart>(2);
  AtomicMeasure planar = attractor_atoms(disk_cantor(), std::pow(2.0, -20));
  AtomicMeasure lifted = planar.pushforward(StereographicLift(chart));

  std::vector<double> qs{0.5, 2.0};
  std::vector<int> ts{4, 5, 6, 7, 8, 9, 10, 11, 12};
  SpectrumTable pt = build_spectrum_table(planar, qs, ts, 0.5, FitMethod::LeastSquares, 0, 12);
  SpectrumTable st = build_spectrum_table(lifted, qs, ts, 0.5, FitMethod::LeastSquares, 0, 12);
  for (std::size_t qi = 0; qi < qs.size(); ++qi) {
    CHECK(std::abs(pt.fits[qi].dim_hat - st.fits[qi].dim_hat) <= 0.05);
  }
}

}  // TEST_SUITE
