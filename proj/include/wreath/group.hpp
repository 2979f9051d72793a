#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wreath/errors.hpp"

namespace wreath {

using Int = std::int64_t;

namespace checked {

inline Int add(Int a, Int b) {
  Int r;
  if (__builtin_add_overflow(a, b, &r)) throw ArithmeticOverflow("integer overflow in addition");
  return r;
}

inline Int sub(Int a, Int b) {
  Int r;
  if (__builtin_sub_overflow(a, b, &r)) throw ArithmeticOverflow("integer overflow in subtraction");
  return r;
}

inline Int neg(Int a) { return sub(0, a); }

inline Int abs(Int a) { return a < 0 ? neg(a) : a; }

}  // namespace checked

/// Finitely supported lamp function Z -> Z in canonical form: entries sorted
/// by position, no zero values.
class LampConfig {
 public:
  using Entry = std::pair<Int, Int>;

  LampConfig() = default;
  /// Builds from arbitrary (position, value) pairs; repeated positions are summed.
  LampConfig(std::initializer_list<Entry> entries);
  static LampConfig from_entries(std::vector<Entry> entries);
  static LampConfig delta(Int position, Int value = 1);

  Int at(Int position) const;
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  /// Smallest / largest support position; undefined on empty support.
  Int min_position() const { return entries_.front().first; }
  Int max_position() const { return entries_.back().first; }

  Int l1_norm() const;
  Int sum_of_squares() const;

  /// Moves every entry from position p to p + offset.
  LampConfig translated(Int offset) const;
  LampConfig negated() const;
  /// Restriction to [from, +inf) or (-inf, to].
  LampConfig restrict_from(Int from) const;
  LampConfig restrict_to(Int to) const;

  friend LampConfig operator+(const LampConfig& a, const LampConfig& b);
  friend LampConfig operator-(const LampConfig& a, const LampConfig& b);

  friend bool operator==(const LampConfig&, const LampConfig&) = default;
  friend auto operator<=>(const LampConfig&, const LampConfig&) = default;

 private:
  std::vector<Entry> entries_;
};

/// Element (f, k) of the wreath product Z wr Z.
struct GroupElement {
  LampConfig lamps;
  Int cursor = 0;

  static GroupElement identity() { return {}; }
  bool is_identity() const noexcept { return cursor == 0 && lamps.empty(); }

  friend bool operator==(const GroupElement&, const GroupElement&) = default;
  friend auto operator<=>(const GroupElement&, const GroupElement&) = default;
};

/// (f,x)(g,y) = (z -> f(z) + g(z - x), x + y)
GroupElement multiply(const GroupElement& a, const GroupElement& b);
GroupElement inverse(const GroupElement& a);

inline GroupElement operator*(const GroupElement& a, const GroupElement& b) { return multiply(a, b); }

class GeneratorSet {
 public:
  explicit GeneratorSet(std::vector<GroupElement> generators);

  const std::vector<GroupElement>& elements() const noexcept { return generators_; }
  std::size_t size() const noexcept { return generators_.size(); }
  const GroupElement& operator[](std::size_t i) const { return generators_[i]; }
  auto begin() const noexcept { return generators_.begin(); }
  auto end() const noexcept { return generators_.end(); }

  /// Index of the inverse of generator i.
  std::size_t inverse_index(std::size_t i) const { return inverse_of_[i]; }

 private:
  std::vector<GroupElement> generators_;
  std::vector<std::size_t> inverse_of_;
};

/// {(delta_0, 0), (-delta_0, 0), (0, 1), (0, -1)} in that order.
const GeneratorSet& canonical_generators();

/// Right multiplication by a lamp or cursor generator, without the general product.
GroupElement step(const GroupElement& g, std::size_t generator_index);

/// Canonical text form `k; p1:v1, p2:v2`; identity is `0;`.
std::string encode(const GroupElement& g);
GroupElement decode(std::string_view text);

std::size_t hash_value(const GroupElement& g) noexcept;

}  // namespace wreath

template <>
struct std::hash<wreath::GroupElement> {
  std::size_t operator()(const wreath::GroupElement& g) const noexcept { return wreath::hash_value(g); }
};
