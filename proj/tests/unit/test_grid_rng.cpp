#include <doctest.h>

#include <cmath>
#include <set>

#include "mixsde/errors.hpp"
#include "mixsde/grid.hpp"
#include "mixsde/parallel.hpp"
#include "mixsde/rng.hpp"

using namespace mixsde;

TEST_SUITE("grid") {
  TEST_CASE("nodes are k T / n with exact endpoints") {
    const TimeGrid g(2.0, 8);
    CHECK(g.size() == 9);
    CHECK(g.step() == 0.25);
    CHECK(g.node(0) == 0.0);
    CHECK(g.node(8) == 2.0);
    const auto t = g.nodes();
    for (Eigen::Index k = 1; k < t.size(); ++k) CHECK(t[k] > t[k - 1]);
  }

  TEST_CASE("invalid grids are rejected") {
    CHECK_THROWS_AS(TimeGrid(0.0, 4), DomainError);
    CHECK_THROWS_AS(TimeGrid(-1.0, 4), DomainError);
    CHECK_THROWS_AS(TimeGrid(1.0, 0), DomainError);
  }

  TEST_CASE("refine_dyadic contains the coarse nodes bit for bit") {
    const TimeGrid coarse(1.0, 4);
    const TimeGrid fine = refine_dyadic(coarse, 1);
    CHECK(fine.steps() == 8);
    CHECK(fine.node(1) == 0.125);
    for (std::size_t j = 0; j <= 4; ++j) CHECK(fine.node(2 * j) == coarse.node(j));

    const TimeGrid odd(0.7, 3);
    const TimeGrid odd_fine = refine_dyadic(odd, 5);
    for (std::size_t j = 0; j <= 3; ++j) CHECK(odd_fine.node(32 * j) == odd.node(j));
    CHECK(odd_fine.refines(odd));
    CHECK(odd_fine.ratio(odd) == 32);
    CHECK_FALSE(odd.refines(odd_fine));
    CHECK_THROWS_AS(odd.ratio(odd_fine), DomainError);
  }

  TEST_CASE("refine_dyadic composes and guards its inputs") {
    const TimeGrid g(1.0, 6);
    CHECK(refine_dyadic(refine_dyadic(g, 1), 1) == refine_dyadic(g, 2));
    CHECK_THROWS_AS(refine_dyadic(g, 0), DomainError);
    CHECK_THROWS_AS(refine_dyadic(g, 3, 40), ResourceError);
    CHECK_NOTHROW(refine_dyadic(g, 2, 24));
  }

  TEST_CASE("floor_index is the floor of the grid") {
    const TimeGrid g = refine_dyadic(TimeGrid(1.0, 10), 3);
    for (int i = 0; i <= 1000; ++i) {
      const double u = i / 1000.0;
      const std::size_t k = g.floor_index(u);
      CHECK(g.node(k) <= u);
      if (k < g.steps()) CHECK(u < g.node(k) + g.step());
    }
    CHECK(g.floor_index(-1.0) == 0);
    CHECK(g.floor_index(5.0) == g.steps());
  }

  TEST_CASE("find_node resolves nodes only") {
    const TimeGrid g(1.0, 16);
    CHECK(g.find_node(0.25) == 4);
    CHECK(g.find_node(1.0) == 16);
    CHECK(g.find_node(0.26) == TimeGrid::npos);
    CHECK(g.find_node(1.5) == TimeGrid::npos);
  }
}

TEST_SUITE("rng") {
  // Known-answer vectors of the Random123 reference implementation.
  TEST_CASE("Philox4x32-10 known answers") {
    using B = Philox4x32::Block;
    CHECK(Philox4x32(Philox4x32::Key{0, 0})(B{0, 0, 0, 0}) ==
          B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32(Philox4x32::Key{0xffffffff, 0xffffffff})(
              B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}) ==
          B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32(Philox4x32::Key{0xa4093822, 0x299f31d0})(
              B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}) ==
          B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
  }

  TEST_CASE("64-bit keys split into low and high words") {
    const Philox4x32::Block ctr{1, 2, 3, 4};
    CHECK(Philox4x32(0x299f31d0a4093822ULL)(ctr) ==
          Philox4x32(Philox4x32::Key{0xa4093822, 0x299f31d0})(ctr));
  }

  TEST_CASE("normal streams are deterministic and separated") {
    const NormalStream a(7, 0), b(7, 0), c(7, 1), d(8, 0);
    std::set<double> seen;
    for (std::uint64_t i = 0; i < 64; ++i) {
      CHECK(a(i) == b(i));
      seen.insert(a(i));
      seen.insert(c(i));
      seen.insert(d(i));
    }
    CHECK(seen.size() == 3 * 64);
    CHECK(wiener_stream(3) == 6);
    CHECK(fbm_stream(3) == 7);
  }

  TEST_CASE("fill matches indexed access") {
    const NormalStream s(11, 5);
    Eigen::VectorXd v(37);
    s.fill(v, 100);
    for (Eigen::Index i = 0; i < v.size(); ++i) CHECK(v[i] == s(100 + static_cast<std::uint64_t>(i)));
  }

  TEST_CASE("normal and uniform moments") {
    const NormalStream s(2024, 9);
    const int m = 200000;
    double sum = 0, sum2 = 0, sum4 = 0, usum = 0, umin = 1, umax = 0;
    for (int i = 0; i < m; ++i) {
      const double z = s(static_cast<std::uint64_t>(i));
      sum += z;
      sum2 += z * z;
      sum4 += z * z * z * z;
      const double u = s.uniform(static_cast<std::uint64_t>(i));
      usum += u;
      umin = std::min(umin, u);
      umax = std::max(umax, u);
    }
    CHECK(std::abs(sum / m) < 5.0 / std::sqrt(m));
    CHECK(std::abs(sum2 / m - 1.0) < 5.0 * std::sqrt(2.0 / m));
    CHECK(std::abs(sum4 / m - 3.0) < 5.0 * std::sqrt(96.0 / m));
    CHECK(std::abs(usum / m - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / m));
    CHECK(umin > 0.0);
    CHECK(umax < 1.0);
  }

  TEST_CASE("parallel_for visits every index once and pairwise_sum is exact on integers") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    std::vector<double> v(1001);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    CHECK(pairwise_sum(v) == 500500.0);
    CHECK_THROWS(parallel_for(10, 3, [](std::size_t i) {
      if (i == 5) throw std::runtime_error("boom");
    }));
  }
}
