#include <doctest.h>

#include <cmath>
#include <functional>

#include "wreath/markov.hpp"

using namespace wreath;

namespace {

FiniteChain<double> flip_chain() {
  Eigen::Vector2d pi(0.5, 0.5);
  Eigen::Matrix2d a;
  a << 0, 1, 1, 0;
  return FiniteChain<double>(pi, a);
}

// E|Z_t - Z_0|^2 for the delayed walk on the interval [lo, hi] of Z, summed
// over all 2^t proposal sequences from every start.
double delayed_interval_second_moment(Int lo, Int hi, Int t, Int core_lo, Int core_hi, bool core_only) {
  double total = 0;
  const double n = double(hi - lo + 1);
  for (Int x = lo; x <= hi; ++x) {
    if (core_only && (x < core_lo || x > core_hi)) continue;
    for (Int mask = 0; mask < (Int{1} << t); ++mask) {
      Int z = x;
      for (Int i = 0; i < t; ++i) {
        const Int y = (mask >> i & 1) ? z + 1 : z - 1;
        if (y >= lo && y <= hi) z = y;
      }
      total += double((z - x) * (z - x)) / double(Int{1} << t);
    }
  }
  return total / n;
}

}  // namespace

TEST_CASE("two-state flip chain") {
  const auto chain = flip_chain();
  chain.validate();
  PointEmbedding<double> emb;
  emb.points = Eigen::Vector2d(0, 1);
  const auto s3 = markov_type_sides(chain, emb, 2.0, 3);
  CHECK(s3.lhs == doctest::Approx(1.0));
  CHECK(s3.rhs == doctest::Approx(3.0));
  const auto s2 = markov_type_sides(chain, emb, 2.0, 2);
  CHECK(s2.lhs == doctest::Approx(0.0));
  CHECK(s2.rhs == doctest::Approx(2.0));
}

TEST_CASE("chain validation") {
  SUBCASE("rotation of a triangle is stationary but not reversible") {
    Eigen::Vector3d pi = Eigen::Vector3d::Constant(1.0 / 3);
    Eigen::Matrix3d a;
    a << 0, 1, 0, 0, 0, 1, 1, 0, 0;
    const FiniteChain<double> c(pi, a);
    CHECK(c.diagnostics().stationarity_error < 1e-15);
    CHECK_THROWS_AS(c.validate(), ValidationError);
  }
  SUBCASE("rows must sum to one") {
    Eigen::Matrix2d a;
    a << 0.5, 0.4, 0.5, 0.5;
    CHECK_THROWS_AS(FiniteChain<double>(Eigen::Vector2d(0.5, 0.5), a).validate(), ValidationError);
  }
  SUBCASE("shape") {
    CHECK_THROWS_AS(FiniteChain<double>(Eigen::Vector3d::Constant(1.0 / 3), Eigen::Matrix2d::Identity()),
                    ValidationError);
  }
  SUBCASE("weights") {
    IntMatrix w(2, 2);
    w << 1, 2, 3, 1;
    CHECK_THROWS_AS(chain_from_weights(w), ValidationError);
  }
}

TEST_CASE("random reversible chains satisfy Markov type 2 and 1 with constant 1") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Int n = 1 + Int(seed % 10);
    const auto chain = random_reversible_chain(n, seed);
    REQUIRE(chain.diagnostics().passes(kChainTolerance));
    const auto emb = random_embedding(n, 1 + Int(seed % 4), seed + 1000);
    for (double p : {1.0, 2.0}) {
      for (const auto& s : markov_type_profile(chain, emb, p, 32)) REQUIRE(s.lhs <= s.rhs + kStepTolerance);
    }
    const auto direct = markov_type_sides(chain, emb, 2.0, 7);
    const auto profile = markov_type_profile(chain, emb, 2.0, 7);
    CHECK(direct.lhs == doctest::Approx(profile.back().lhs).epsilon(1e-12));
  }
  // deterministic in the seed
  CHECK(random_weighted_graph(8, 3) == random_weighted_graph(8, 3));
}

TEST_CASE("sparse and dense matrix powers agree") {
  const auto big = random_reversible_chain(150, 17);
  Eigen::MatrixXd naive = Eigen::MatrixXd::Identity(150, 150);
  for (int i = 0; i < 5; ++i) naive = naive * big.transition();
  CHECK((transition_power(big, 5) - naive).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(transition_power(big, 0).isIdentity());
}

TEST_CASE("chain code is generic in the scalar") {
  Eigen::Matrix<long double, 2, 1> pi(0.5L, 0.5L);
  Eigen::Matrix<long double, 2, 2> a;
  a << 0.25L, 0.75L, 0.75L, 0.25L;
  const FiniteChain<long double> c(pi, a);
  c.validate();
  PointEmbedding<long double> emb;
  emb.points = Eigen::Matrix<long double, 2, 1>(0.0L, 2.0L);
  const auto s = markov_type_sides(c, emb, 2.0L, 2);
  // P(Z_2 != Z_0) = 2 * 0.25 * 0.75
  CHECK(double(s.lhs) == doctest::Approx(4 * 0.375));
  CHECK(double(s.rhs) == doctest::Approx(2 * 4 * 0.75));
}

TEST_CASE("delayed walk on {0, 1, 2}") {
  const auto chain = delayed_walk(SubsetWalkSpec<Int>{integer_host(), {0, 1, 2}});
  Eigen::Matrix3d expected;
  expected << 0.5, 0.5, 0, 0.5, 0, 0.5, 0, 0.5, 0.5;
  CHECK((chain.transition() - expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(chain.diagnostics().passes(kChainTolerance));
  CHECK_THROWS_AS(delayed_walk(SubsetWalkSpec<Int>{integer_host(), {0, 1, 0}}), ValidationError);
}

TEST_CASE("delayed walks on grid and lamplighter subsets") {
  const auto grid = grid_host();
  const auto disk = grid.ball({0, 0}, 3);
  CHECK(disk.size() == 25);
  CHECK(delayed_walk(SubsetWalkSpec<GridPoint>{grid, disk}).diagnostics().passes(kChainTolerance));

  const auto box = truncated_lamplighter_box(1, 1);
  CHECK(box.size() == 3 * 27);
  CHECK(truncated_lamplighter_box(2, 1).size() == 5 * 243);
  const auto chain = delayed_walk(SubsetWalkSpec<GroupElement>{lamplighter_host(), box});
  CHECK(chain.diagnostics().passes(kChainTolerance));
}

TEST_CASE("Folner fattening") {
  const auto host = integer_host();
  std::vector<Int> core;
  for (Int x = -20; x <= 20; ++x) core.push_back(x);
  const auto fat = folner_fatten(core, 4, host);
  CHECK(fat.core_size == 41);
  CHECK(fat.vertices.size() == 49);
  CHECK(fat.ratio() == doctest::Approx(8.0 / 41));
  CHECK(std::equal(core.begin(), core.end(), fat.vertices.begin()));
  CHECK_THROWS_AS(folner_fatten(core, 400, host, 100), ResourceLimit);
}

TEST_CASE("free walk distance law") {
  const auto law = walk_distance_law(integer_host(), 4);
  CHECK(law.at(0) == doctest::Approx(6.0 / 16));
  CHECK(law.at(2) == doctest::Approx(8.0 / 16));
  CHECK(law.at(4) == doctest::Approx(2.0 / 16));
  // lamplighter: one step is always at distance 1
  CHECK(walk_distance_law(lamplighter_host(), 1).at(1) == doctest::Approx(1.0));
  const auto l2 = walk_distance_law(lamplighter_host(), 2);
  CHECK(l2.at(0) == doctest::Approx(0.25));
  CHECK(l2.at(2) == doctest::Approx(0.75));
}

TEST_CASE("replay on Z with F = [-20, 20], t = 4") {
  const auto host = integer_host();
  std::vector<Int> core;
  for (Int x = -20; x <= 20; ++x) core.push_back(x);
  const auto emb = [](const Int& x) { return Eigen::VectorXd::Constant(1, double(x)); };
  const auto rep = proposition_replay<Int>(core, 4, emb, [](double s) { return s; }, 2.0, host, 2.0);
  CHECK(rep.holds);
  CHECK(rep.violations.empty());
  CHECK(rep.upper == 4.0);
  CHECK(rep.free_expectation == doctest::Approx(4.0));
  CHECK(rep.lower == doctest::Approx(41.0 / 49 * 4));
  CHECK(rep.restricted == doctest::Approx(delayed_interval_second_moment(-24, 24, 4, -20, 20, true)));
  CHECK(rep.markov_lhs == doctest::Approx(delayed_interval_second_moment(-24, 24, 4, 0, 0, false)));
  CHECK(rep.rho_full == doctest::Approx(rep.markov_lhs));
  CHECK(rep.graph_rhs == doctest::Approx(4 * (1 - 1.0 / 49)));
  CHECK(rep.markov_rhs == doctest::Approx(rep.graph_rhs));
  CHECK(*rep.tail_probability == doctest::Approx(10.0 / 16));
  CHECK(*rep.final_bound <= rep.lower);

  SUBCASE("p = 1 and a zero rho") {
    const auto r1 = proposition_replay<Int>(core, 4, emb, [](double) { return 0.0; }, 1.0, host);
    CHECK(r1.holds);
    CHECK(r1.lower == 0.0);
  }
  SUBCASE("t = 0") {
    const auto r0 = proposition_replay<Int>(core, 0, emb, [](double s) { return s; }, 2.0, host);
    CHECK(r0.holds);
    CHECK(r0.fattened_size == 41);
    CHECK(r0.upper == 0.0);
  }
  SUBCASE("preconditions") {
    const auto stretched = [](const Int& x) { return Eigen::VectorXd::Constant(1, 2.0 * double(x)); };
    CHECK_THROWS_AS(proposition_replay<Int>(core, 2, stretched, [](double s) { return s; }, 2.0, host),
                    ValidationError);
    CHECK_THROWS_AS(proposition_replay<Int>(core, 2, emb, [](double s) { return 2 * s; }, 2.0, host),
                    ValidationError);
    CHECK_THROWS_AS(proposition_replay<Int>(core, 2, emb, [](double s) { return s; }, 3.0, host),
                    ValidationError);
    CHECK_THROWS_AS(
        proposition_replay<Int>(core, 2, emb, [](double s) { return s == 2 ? 0.5 : std::min(s, 1.0); }, 2.0, host),
        ValidationError);
  }
}

TEST_CASE("replay on the grid and the lamplighter") {
  const auto grid = grid_host();
  const auto core = grid.ball({0, 0}, 3);
  const auto rep = proposition_replay<GridPoint>(
      core, 3, [](const GridPoint& g) { return Eigen::Vector2d(double(g.x), double(g.y)).eval(); },
      [](double s) { return s / std::sqrt(2.0); }, 2.0, grid, 2.0);
  CHECK(rep.holds);
  CHECK(rep.lower <= rep.upper);

  const auto lamp = lamplighter_host();
  const std::vector<GroupElement> lcore{GroupElement::identity(), GroupElement{{}, 1}};
  const auto lrep = proposition_replay<GroupElement>(
      lcore, 2,
      [](const GroupElement& g) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(8);
        v(0) = double(g.cursor);
        for (const auto& [j, x] : g.lamps) v(j + 4) = double(x);
        return v;
      },
      [](double) { return 0.0; }, 2.0, lamp);
  CHECK(lrep.holds);
}

TEST_CASE("bound calculator") {
  CHECK(alpha_upper(0.75) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(alpha_upper(0.5) == 1.0);
  CHECK(alpha_upper(0.25) == 1.0);
  CHECK(alpha_upper(Rational{3, 4}) == Rational{2, 3});
  CHECK(alpha_upper(Rational{6, 8}) == Rational{2, 3});
  CHECK_THROWS_AS(alpha_upper(0.0), ValidationError);
  CHECK_THROWS_AS(alpha_upper(Rational{5, 4}), ValidationError);

  const std::vector<Rational> expected{{1, 1}, {2, 3}, {4, 7}, {8, 15}, {16, 31}, {32, 63}};
  for (int k = 1; k <= 6; ++k) {
    const auto row = iterated_wreath_row(k);
    CHECK(row.bound == expected[std::size_t(k - 1)]);
    CHECK(row.bound.value() == doctest::Approx(1.0 / (2.0 - std::pow(2.0, 1 - k))));
  }

  const auto s = proposition_bound(3.0, 1.0, 0.25, 2.0, 16);
  CHECK(s.lhs == 3.0);
  CHECK(s.rhs == doctest::Approx(8.0));
  CHECK_THROWS_AS(proposition_bound(1, 1, 0, 2, 1), ValidationError);
  CHECK_THROWS_AS(proposition_bound(1, 1, 0.5, 2, 0), ValidationError);
}
