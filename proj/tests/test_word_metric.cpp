#include <doctest.h>

#include <map>
#include <random>

#include "support.hpp"
#include "wreath/word_metric.hpp"

using namespace wreath;

namespace {

// Depth-first enumeration of reduced words (no generator followed by its
// inverse); every geodesic is reduced, so the shortest word found is exact.
void enumerate_words(const GroupElement& g, Int depth, Int limit, std::size_t last,
                     std::map<GroupElement, Int>& shortest) {
  auto [it, fresh] = shortest.try_emplace(g, depth);
  if (!fresh) it->second = std::min(it->second, depth);
  if (depth == limit) return;
  const auto& s = canonical_generators();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (depth > 0 && s.inverse_index(i) == last) continue;
    enumerate_words(step(g, i), depth + 1, limit, i, shortest);
  }
}

std::map<GroupElement, Int> word_oracle(Int radius) {
  std::map<GroupElement, Int> shortest;
  enumerate_words(GroupElement::identity(), 0, radius, 0, shortest);
  return shortest;
}

}  // namespace

TEST_CASE("closed form on hand-checked elements") {
  // generators and identity
  CHECK(word_length(GroupElement::identity()).total == 0);
  for (const auto& s : canonical_generators()) CHECK(word_length(s).total == 1);

  // 3 delta_2: walk to 2, press three times, walk back
  const auto w = word_length({LampConfig::delta(2, 3), 0});
  CHECK(w.total == 7);
  CHECK(w.lamp_cost == 3);
  CHECK(w.travel_cost == 4);

  // lamps on both sides, cursor ends to the right
  const GroupElement g{{{-1, 3}, {4, -2}}, 2};
  const auto wg = word_length(g);
  CHECK(wg.lamp_cost == 5);
  CHECK(wg.travel_cost == 8);  // 0 -> -1 -> 4 -> 2
  CHECK(wg.direction == SweepDirection::LeftFirst);
  CHECK(wg.total == distance_bfs(GroupElement::identity(), g, 13));

  // support inside [0, k]: no detour
  const auto wd = word_length({{{1, 1}, {3, -1}}, 5});
  CHECK(wd.total == 7);
  CHECK(wd.direction == SweepDirection::Degenerate);

  const auto wr = word_length({{{-3, 1}, {1, 1}}, -2});
  CHECK(wr.travel_cost == 1 + 4 + 1);  // 0 -> 1 -> -3 -> -2
  CHECK(wr.direction == SweepDirection::RightFirst);
}

TEST_CASE("closed form equals BFS on the radius-5 ball and random pairs") {
  const auto table = ball(5);
  for (const auto& [code, d] : table.entries) REQUIRE(word_length(decode(code)).total == d);

  std::mt19937_64 rng(31337);
  for (int i = 0; i < 40; ++i) {
    const auto a = testing::random_element(rng, 3, 1, 2);
    const auto b = testing::random_element(rng, 3, 1, 2);
    const Int d = distance(a, b).total;
    if (d > 9) continue;
    REQUIRE(distance_bfs(a, b, d) == d);
  }
}

TEST_CASE("ball agrees with reduced-word enumeration up to radius 8") {
  for (Int r : {0, 1, 2, 3, 5, 8}) {
    const auto oracle = word_oracle(r);
    const auto table = ball(r);
    REQUIRE(table.size() == oracle.size());
    for (const auto& [g, d] : oracle) {
      auto it = table.entries.find(encode(g));
      REQUIRE(it != table.entries.end());
      REQUIRE(it->second == d);
    }
  }
  CHECK(ball(0).size() == 1);
  CHECK(ball(1).size() == 5);

  const auto elems = ball_elements(ball(3));
  CHECK(elems.front() == GroupElement::identity());
  for (std::size_t i = 1; i < elems.size(); ++i) CHECK(word_length(elems[i - 1]).total <= word_length(elems[i]).total);
}

TEST_CASE("metric axioms") {
  std::mt19937_64 rng(4242);
  for (int i = 0; i < 1000; ++i) {
    const auto a = testing::random_element(rng, 8, 4, 5);
    const auto b = testing::random_element(rng, 8, 4, 5);
    const auto c = testing::random_element(rng, 8, 4, 5);
    const Int ab = distance(a, b).total;
    REQUIRE(ab == distance(b, a).total);
    REQUIRE((ab == 0) == (a == b));
    REQUIRE(distance(c * a, c * b).total == ab);
    REQUIRE(distance(a, c).total <= ab + distance(b, c).total);
    // neighbours differ by exactly one
    for (const auto& s : canonical_generators()) REQUIRE(distance(a, a * s).total == 1);
  }
}

TEST_CASE("search limits") {
  const GroupElement far{LampConfig::delta(0, 5), 0};
  CHECK_THROWS_AS(distance_bfs(GroupElement::identity(), far, 4), OutOfRange);
  CHECK(distance_bfs(GroupElement::identity(), far, 5) == 5);
  CHECK_THROWS_AS(ball(6, 100), ResourceLimit);
  CHECK_THROWS_AS(ball(-1), ValidationError);
}

TEST_CASE("lower-bound profile") {
  const auto p = lower_bound_profile({{{-1, 3}, {4, -2}}, 2});
  CHECK(p.k == 2);
  CHECK(p.m == 3);
  CHECK(p.lamp_sum == 5);
  CHECK(lower_bound_profile(GroupElement::identity()).m == 0);
}
