#pragma once

#include <random>

#include "wreath/group.hpp"

namespace wreath::testing {

// Random element with cursor and lamp positions in [-span, span], values in [-amp, amp].
inline GroupElement random_element(std::mt19937_64& rng, Int span = 6, Int amp = 3, int max_lamps = 4) {
  std::uniform_int_distribution<Int> pos(-span, span);
  std::uniform_int_distribution<Int> val(-amp, amp);
  std::uniform_int_distribution<int> count(0, max_lamps);
  std::vector<LampConfig::Entry> entries;
  for (int i = count(rng); i > 0; --i) entries.emplace_back(pos(rng), val(rng));
  return {LampConfig::from_entries(std::move(entries)), pos(rng)};
}

}  // namespace wreath::testing
