#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "mixsde/errors.hpp"
#include "mixsde/euler.hpp"
#include "mixsde/model.hpp"
#include "support.hpp"

using namespace mixsde;

namespace {

std::shared_ptr<const NoisePair> noise(std::size_t n, std::uint64_t seed, double h = 0.7) {
  return std::make_shared<const NoisePair>(
      generate_noise_pair(TimeGrid(1.0, n), HurstIndex(h), seed, Dependence{}));
}

std::shared_ptr<const CoefficientSet> shared(CoefficientSet s) {
  return std::make_shared<const CoefficientSet>(std::move(s));
}

std::shared_ptr<const CoefficientSet> drift_one() {
  auto zero = [](double, double) { return 0.0; };
  return testing::coefficients([](double, double) { return 1.0; }, zero, zero, zero);
}

std::shared_ptr<const CoefficientSet> geometric(double lambda) {
  auto zero = [](double, double) { return 0.0; };
  return testing::coefficients(zero, zero, [lambda](double, double x) { return lambda * x; },
                               [lambda](double, double) { return lambda; });
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

TEST_SUITE("euler") {
  TEST_CASE("trivial models") {
    const auto nz = noise(64, 1);
    const auto still = euler_solve(testing::zero_coefficients(), nz, 1.0);
    CHECK((still.values.array() == 1.0).all());

    const auto drift = euler_solve(drift_one(), nz, 0.0);
    for (std::size_t k = 0; k <= 64; ++k) {
      CHECK(drift.values[static_cast<Eigen::Index>(k)] == doctest::Approx(drift.grid.node(k)).epsilon(1e-14));
    }
    const auto coarse = euler_solve(drift_one(), nz, 0.0, TimeGrid(1.0, 8));
    for (std::size_t j = 0; j <= 64; ++j) {
      CHECK(interpolate(coarse, nz->grid().node(j)) ==
            doctest::Approx(nz->grid().node(j)).epsilon(1e-14));
    }
  }

  TEST_CASE("the recursion is reproducible from the stored noise") {
    const auto nz = noise(128, 5);
    const auto coeffs = shared(preset("bounded-smooth"));
    const auto sol = euler_solve(coeffs, nz, 0.4, TimeGrid(1.0, 32));
    CHECK(sol.values[0] == 0.4);
    CHECK(sol.stride == 4);
    for (Eigen::Index k = 0; k < 32; ++k) {
      const double t = sol.grid.node(static_cast<std::size_t>(k));
      const double x = sol.values[k];
      const Eigen::Index j = 4 * k;
      const double next = x + coeffs->a(t, x) * sol.grid.step() +
                          coeffs->b(t, x) * (nz->w.values[j + 4] - nz->w.values[j]) +
                          coeffs->c(t, x) * (nz->bh.values[j + 4] - nz->bh.values[j]);
      CHECK(sol.values[k + 1] == next);
      CHECK(sol.a[k] == coeffs->a(t, x));
    }
    const auto again = euler_solve(coeffs, nz, 0.4, TimeGrid(1.0, 32));
    CHECK(again.values == sol.values);
  }

  TEST_CASE("interpolation anchors at nodes and refuses unresolvable points") {
    const auto nz = noise(256, 2);
    const auto sol = euler_solve(shared(preset("linear")), nz, 1.0, TimeGrid(1.0, 16));
    for (std::size_t k = 0; k <= 16; ++k) {
      CHECK(interpolate(sol, sol.grid.node(k)) == sol.values[static_cast<Eigen::Index>(k)]);
    }
    CHECK_THROWS_AS(interpolate(sol, 0.5 / 256.0), DomainError);
    CHECK_THROWS_AS(interpolate(sol, 1.5), DomainError);
    CHECK_THROWS_AS(euler_solve(shared(preset("linear")), nz, 1.0, TimeGrid(1.0, 3)), DomainError);
  }

  TEST_CASE("coarse interpolation matches a direct fine-grid evaluation of the integral form") {
    const std::size_t fine = 1024, coarse = 32, r = fine / coarse;
    const auto nz = noise(fine, 12);
    const auto coeffs = shared(preset("bounded-smooth"));
    const auto sol = euler_solve(coeffs, nz, -0.3, TimeGrid(1.0, coarse));
    const Eigen::VectorXd got = interpolate_on_noise_grid(sol);

    // X_u = X_0 + sum over fine cells below u of the frozen coefficients at
    // the coarse node t^delta_s times the fine increments of s, W and B.
    const TimeGrid fg = nz->grid();
    Eigen::VectorXd expect(static_cast<Eigen::Index>(fine + 1));
    expect[0] = -0.3;
    double x_node = -0.3;
    for (std::size_t j = 0; j < fine; ++j) {
      if (j % r == 0) x_node = expect[static_cast<Eigen::Index>(j)];
      const double t_node = (static_cast<double>(j / r) * 1.0) / static_cast<double>(coarse);
      const auto ji = static_cast<Eigen::Index>(j);
      expect[ji + 1] = expect[ji] + coeffs->a(t_node, x_node) * (fg.node(j + 1) - fg.node(j)) +
                       coeffs->b(t_node, x_node) * (nz->w.values[ji + 1] - nz->w.values[ji]) +
                       coeffs->c(t_node, x_node) * (nz->bh.values[ji + 1] - nz->bh.values[ji]);
    }
    CHECK((got - expect).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + expect.cwiseAbs().maxCoeff()));
    for (std::size_t k = 0; k <= coarse; ++k) {
      CHECK(got[static_cast<Eigen::Index>(k * r)] == sol.values[static_cast<Eigen::Index>(k)]);
    }
  }

  TEST_CASE("blow-ups carry the first offending step") {
    const auto nz = noise(64, 3);
    auto zero = [](double, double) { return 0.0; };
    const auto explode = testing::coefficients([](double, double x) { return 1e4 * x * x; }, zero,
                                               zero, zero);
    try {
      euler_solve(explode, nz, 1.0);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(e.step() > 0);
      CHECK(e.step() <= 64);
    }
    const auto nan = testing::coefficients([](double, double x) { return std::log(x - 2.0); },
                                           zero, zero, zero);
    try {
      euler_solve(nan, nz, 1.0);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(e.step() == 1);
    }
  }

  TEST_CASE("geometric fBm converges to the chain-rule solution") {
    const double lambda = 0.5;
    const auto coeffs = geometric(lambda);
    const std::size_t fine = 4096;
    std::vector<double> e8, e10, e12;
    for (std::uint64_t p = 0; p < 30; ++p) {
      const auto nz = std::make_shared<const NoisePair>(
          NoiseGenerator(TimeGrid(1.0, fine), HurstIndex(0.7), Dependence{}).sample(40, p));
      const double exact = std::exp(lambda * nz->bh.values[static_cast<Eigen::Index>(fine)]);
      auto err = [&](std::size_t n) {
        const auto sol = euler_solve(coeffs, nz, 1.0, TimeGrid(1.0, n));
        return std::abs(sol.values[static_cast<Eigen::Index>(n)] - exact) / exact;
      };
      e8.push_back(err(256));
      e10.push_back(err(1024));
      e12.push_back(err(4096));
    }
    CHECK(median(e12) <= 0.05);
    CHECK(median(e10) < median(e8));
    CHECK(median(e12) < median(e10));
  }

  TEST_CASE("stopping time examples") {
    const auto nz = noise(512, 7);
    const auto never = stopping_time(*nz, 0.1, 1e9, FunctionalKind::sum);
    CHECK(never.tau == 1.0);
    CHECK(never.index == 512);
    CHECK_FALSE(never.hit);

    const auto first = stopping_time(*nz, 0.1, 1e-12, FunctionalKind::sum);
    CHECK(first.index == 1);
    CHECK(first.tau == nz->grid().node(1));
    const auto monitored = stopping_time(*nz, 0.1, 1e-12, FunctionalKind::sum, 8);
    CHECK(monitored.index == 8);

    CHECK_THROWS_AS(stopping_time(*nz, 0.1, 0.0, FunctionalKind::sum), DomainError);
    CHECK_THROWS_AS(stopping_time(*nz, 0.6, 1.0, FunctionalKind::wiener), DomainError);
    CHECK_THROWS_AS(stopping_time(*nz, 0.1, 1.0, FunctionalKind::sum, 7), DomainError);
  }

  TEST_CASE("stopping time is monotone in the threshold and the functional kind") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto nz = noise(512, seed);
      const Eigen::VectorXd w = functional_series(*nz, 0.1, FunctionalKind::wiener, 2);
      const Eigen::VectorXd b = functional_series(*nz, 0.1, FunctionalKind::fbm, 2);
      const Eigen::VectorXd s = functional_series(*nz, 0.1, FunctionalKind::sum, 2);
      CHECK((s - w - b).cwiseAbs().maxCoeff() <= 1e-12 * s.maxCoeff());
      double previous = 0.0;
      for (double n : {0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 8.0}) {
        const double tau = stopping_time(*nz, 0.1, n, FunctionalKind::sum, 2).tau;
        CHECK(tau >= previous);
        CHECK(tau > 0.0);
        previous = tau;
        CHECK(stopping_time(*nz, 0.1, n, FunctionalKind::wiener, 2).tau >= tau);
      }
    }
    CHECK(parse_functional_kind("W") == FunctionalKind::wiener);
    CHECK(parse_functional_kind("fbm") == FunctionalKind::fbm);
    CHECK_THROWS_AS(parse_functional_kind("both"), DomainError);
  }

  TEST_CASE("stopped solutions freeze after tau") {
    const auto nz = noise(256, 9);
    const auto sol = euler_solve(shared(preset("linear")), nz, 1.0, TimeGrid(1.0, 32));

    const auto full = stop(sol, 1.0);
    CHECK(full.values == sol.values);
    CHECK(full.on_noise_grid() == interpolate_on_noise_grid(sol));

    const auto start = stop(sol, 0.0);
    CHECK((start.values.array() == 1.0).all());

    const double tau = sol.grid.node(11);
    const auto mid = stop(sol, tau);
    CHECK(mid.frozen == sol.values[11]);
    for (Eigen::Index k = 0; k <= 32; ++k) {
      CHECK(mid.values[k] == (k <= 11 ? sol.values[k] : sol.values[11]));
    }
    const Eigen::VectorXd path = mid.on_noise_grid();
    for (Eigen::Index j = 88; j <= 256; ++j) CHECK(path[j] == sol.values[11]);

    // Off the solver grid the path freezes at the interpolated value.
    const double off = nz->grid().node(93);
    const auto between = stop(sol, off);
    CHECK(between.frozen == interpolate(sol, off));
    CHECK(between.values[11] == sol.values[11]);
    CHECK(between.values[12] == between.frozen);
    CHECK_THROWS_AS(stop(sol, 0.001), DomainError);
  }

  TEST_CASE("solver configuration windows") {
    SolverConfig c;
    CHECK_NOTHROW(c.validate(0.7, 0.9));
    SolverConfig low = c;
    low.alpha = 0.25;
    CHECK_THROWS_AS(low.validate(0.7, 0.9), DomainError);
    SolverConfig high = c;
    high.alpha = 0.5;
    CHECK_THROWS_AS(high.validate(0.7, 0.9), DomainError);
    SolverConfig eta = c;
    eta.eta = 0.2;
    CHECK_THROWS_AS(eta.validate(0.7, 0.9), DomainError);
    SolverConfig eps = c;
    eps.epsilon = 0.2;
    CHECK_THROWS_AS(eps.validate(0.7, 0.9), DomainError);
    SolverConfig n = c;
    n.threshold = 0.0;
    CHECK_THROWS_AS(n.validate(0.7, 0.9), DomainError);
    SolverConfig r = c;
    r.radius = -1.0;
    CHECK_THROWS_AS(r.validate(0.7, 0.9), DomainError);
    CHECK_THROWS_AS(c.validate(0.7, 0.3), DomainError);
  }
}
