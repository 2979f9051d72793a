#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>

#include "wreath/group.hpp"

namespace wreath {

enum class SweepDirection { LeftFirst, RightFirst, Degenerate };

std::string to_string(SweepDirection d);

/// Decomposition of a word-metric distance into lamp changes and cursor travel.
struct MetricWitness {
  Int total = 0;
  Int lamp_cost = 0;
  Int travel_cost = 0;
  SweepDirection direction = SweepDirection::Degenerate;

  friend bool operator==(const MetricWitness&, const MetricWitness&) = default;
};

/// Exact distance from a to b for the canonical generators, via the two-sweep
/// formula on inverse(a) * b.
MetricWitness distance(const GroupElement& a, const GroupElement& b);

/// Word length of g (distance from the identity).
MetricWitness word_length(const GroupElement& g);

/// Breadth-first search over the Cayley graph starting at a. Throws OutOfRange
/// if b is farther than max_radius.
Int distance_bfs(const GroupElement& a, const GroupElement& b, Int max_radius);

inline constexpr std::size_t kDefaultBallCap = 10'000'000;

/// Identity-centered ball, keyed by canonical encoding.
struct BallTable {
  Int radius = 0;
  std::unordered_map<std::string, Int> entries;

  std::size_t size() const noexcept { return entries.size(); }
};

/// Complete ball with exact distances, built by breadth-first search.
/// Throws ResourceLimit once more than `cap` elements would be stored.
BallTable ball(Int radius, std::size_t cap = kDefaultBallCap);

/// Ball elements decoded and ordered by (distance, canonical order).
std::vector<GroupElement> ball_elements(const BallTable& table);

struct LowerBoundProfile {
  Int k = 0;         // cursor
  Int m = 0;         // smallest m with supp(f) inside [k - m, k + m]
  Int lamp_sum = 0;  // sum of |f(j)|
};

LowerBoundProfile lower_bound_profile(const GroupElement& g);

}  // namespace wreath
