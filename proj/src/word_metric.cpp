#include "wreath/word_metric.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

namespace wreath {

std::string to_string(SweepDirection d) {
  switch (d) {
    case SweepDirection::LeftFirst:
      return "left-first";
    case SweepDirection::RightFirst:
      return "right-first";
    case SweepDirection::Degenerate:
      return "degenerate";
  }
  return "unknown";
}

MetricWitness word_length(const GroupElement& g) {
  const Int k = g.cursor;
  MetricWitness w;
  w.lamp_cost = g.lamps.l1_norm();

  Int lo = std::min<Int>(0, k);
  Int hi = std::max<Int>(0, k);
  const bool degenerate = g.lamps.empty() || (g.lamps.min_position() >= lo && g.lamps.max_position() <= hi);
  Int left = lo;
  Int right = hi;
  if (!g.lamps.empty()) {
    left = std::min(left, g.lamps.min_position());
    right = std::max(right, g.lamps.max_position());
  }
  const Int span = checked::sub(right, left);
  // 0 -> left -> right -> k   versus   0 -> right -> left -> k
  const Int left_first = checked::add(checked::add(checked::neg(left), span), checked::sub(right, k));
  const Int right_first = checked::add(checked::add(right, span), checked::sub(k, left));

  if (left_first <= right_first) {
    w.travel_cost = left_first;
    w.direction = SweepDirection::LeftFirst;
  } else {
    w.travel_cost = right_first;
    w.direction = SweepDirection::RightFirst;
  }
  if (degenerate) w.direction = SweepDirection::Degenerate;
  w.total = checked::add(w.lamp_cost, w.travel_cost);
  return w;
}

MetricWitness distance(const GroupElement& a, const GroupElement& b) {
  return word_length(multiply(inverse(a), b));
}

Int distance_bfs(const GroupElement& a, const GroupElement& b, Int max_radius) {
  if (max_radius < 0) throw ValidationError("max_radius must be nonnegative");
  if (a == b) return 0;
  std::unordered_set<GroupElement> seen{a};
  std::vector<GroupElement> frontier{a};
  for (Int r = 1; r <= max_radius; ++r) {
    std::vector<GroupElement> next;
    for (const auto& x : frontier) {
      for (std::size_t s = 0; s < canonical_generators().size(); ++s) {
        GroupElement y = step(x, s);
        if (y == b) return r;
        if (seen.insert(y).second) next.push_back(std::move(y));
      }
    }
    frontier = std::move(next);
  }
  throw OutOfRange("target not reached within radius " + std::to_string(max_radius));
}

BallTable ball(Int radius, std::size_t cap) {
  if (radius < 0) throw ValidationError("ball radius must be nonnegative");
  BallTable table;
  table.radius = radius;
  std::unordered_set<GroupElement> seen{GroupElement::identity()};
  std::vector<GroupElement> frontier{GroupElement::identity()};
  table.entries.emplace(encode(GroupElement::identity()), 0);
  for (Int r = 1; r <= radius; ++r) {
    std::vector<GroupElement> next;
    for (const auto& x : frontier) {
      for (std::size_t s = 0; s < canonical_generators().size(); ++s) {
        GroupElement y = step(x, s);
        if (!seen.insert(y).second) continue;
        if (seen.size() > cap) {
          throw ResourceLimit("ball enumeration exceeded cap of " + std::to_string(cap) + " elements");
        }
        table.entries.emplace(encode(y), r);
        next.push_back(std::move(y));
      }
    }
    frontier = std::move(next);
  }
  return table;
}

std::vector<GroupElement> ball_elements(const BallTable& table) {
  std::vector<std::pair<Int, GroupElement>> tagged;
  tagged.reserve(table.size());
  for (const auto& [enc, d] : table.entries) tagged.emplace_back(d, decode(enc));
  std::sort(tagged.begin(), tagged.end());
  std::vector<GroupElement> out;
  out.reserve(tagged.size());
  for (auto& [d, g] : tagged) out.push_back(std::move(g));
  return out;
}

LowerBoundProfile lower_bound_profile(const GroupElement& g) {
  LowerBoundProfile p;
  p.k = g.cursor;
  for (const auto& [j, v] : g.lamps) p.m = std::max(p.m, checked::abs(checked::sub(j, g.cursor)));
  p.lamp_sum = g.lamps.l1_norm();
  return p;
}

}  // namespace wreath
