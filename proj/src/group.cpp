#include "wreath/group.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace wreath {

namespace {

// Sorts, merges repeated positions with checked sums and drops zeros.
std::vector<LampConfig::Entry> canonicalize(std::vector<LampConfig::Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<LampConfig::Entry> out;
  out.reserve(entries.size());
  for (const auto& [pos, val] : entries) {
    if (!out.empty() && out.back().first == pos) {
      out.back().second = checked::add(out.back().second, val);
    } else {
      out.emplace_back(pos, val);
    }
  }
  std::erase_if(out, [](const auto& e) { return e.second == 0; });
  return out;
}

// Merge of two canonical entry lists, b scaled by sign (+1 / -1).
std::vector<LampConfig::Entry> merge(const std::vector<LampConfig::Entry>& a,
                                     const std::vector<LampConfig::Entry>& b, int sign) {
  std::vector<LampConfig::Entry> out;
  out.reserve(a.size() + b.size());
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() || j != b.end()) {
    if (j == b.end() || (i != a.end() && i->first < j->first)) {
      out.push_back(*i++);
    } else if (i == a.end() || j->first < i->first) {
      out.emplace_back(j->first, sign > 0 ? j->second : checked::neg(j->second));
      ++j;
    } else {
      Int v = sign > 0 ? checked::add(i->second, j->second) : checked::sub(i->second, j->second);
      if (v != 0) out.emplace_back(i->first, v);
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace

LampConfig::LampConfig(std::initializer_list<Entry> entries)
    : entries_(canonicalize(std::vector<Entry>(entries))) {}

LampConfig LampConfig::from_entries(std::vector<Entry> entries) {
  LampConfig c;
  c.entries_ = canonicalize(std::move(entries));
  return c;
}

LampConfig LampConfig::delta(Int position, Int value) {
  LampConfig c;
  if (value != 0) c.entries_.emplace_back(position, value);
  return c;
}

Int LampConfig::at(Int position) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), position,
                             [](const Entry& e, Int p) { return e.first < p; });
  return (it != entries_.end() && it->first == position) ? it->second : 0;
}

Int LampConfig::l1_norm() const {
  Int s = 0;
  for (const auto& e : entries_) s = checked::add(s, checked::abs(e.second));
  return s;
}

Int LampConfig::sum_of_squares() const {
  Int s = 0;
  for (const auto& e : entries_) {
    Int sq;
    if (__builtin_mul_overflow(e.second, e.second, &sq)) throw ArithmeticOverflow("lamp square overflow");
    s = checked::add(s, sq);
  }
  return s;
}

LampConfig LampConfig::translated(Int offset) const {
  LampConfig c;
  c.entries_.reserve(entries_.size());
  for (const auto& [p, v] : entries_) c.entries_.emplace_back(checked::add(p, offset), v);
  return c;
}

LampConfig LampConfig::negated() const {
  LampConfig c;
  c.entries_.reserve(entries_.size());
  for (const auto& [p, v] : entries_) c.entries_.emplace_back(p, checked::neg(v));
  return c;
}

LampConfig LampConfig::restrict_from(Int from) const {
  LampConfig c;
  auto it = std::lower_bound(entries_.begin(), entries_.end(), from,
                             [](const Entry& e, Int p) { return e.first < p; });
  c.entries_.assign(it, entries_.end());
  return c;
}

LampConfig LampConfig::restrict_to(Int to) const {
  LampConfig c;
  auto it = std::upper_bound(entries_.begin(), entries_.end(), to,
                             [](Int p, const Entry& e) { return p < e.first; });
  c.entries_.assign(entries_.begin(), it);
  return c;
}

LampConfig operator+(const LampConfig& a, const LampConfig& b) {
  LampConfig c;
  c.entries_ = merge(a.entries_, b.entries_, +1);
  return c;
}

LampConfig operator-(const LampConfig& a, const LampConfig& b) {
  LampConfig c;
  c.entries_ = merge(a.entries_, b.entries_, -1);
  return c;
}

GroupElement multiply(const GroupElement& a, const GroupElement& b) {
  return {a.lamps + b.lamps.translated(a.cursor), checked::add(a.cursor, b.cursor)};
}

GroupElement inverse(const GroupElement& a) {
  return {a.lamps.translated(checked::neg(a.cursor)).negated(), checked::neg(a.cursor)};
}

GeneratorSet::GeneratorSet(std::vector<GroupElement> generators) : generators_(std::move(generators)) {
  inverse_of_.resize(generators_.size());
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    GroupElement inv = inverse(generators_[i]);
    auto it = std::find(generators_.begin(), generators_.end(), inv);
    if (it == generators_.end()) {
      throw ValidationError("generator set is not closed under inverses: missing inverse of " +
                            encode(generators_[i]));
    }
    inverse_of_[i] = static_cast<std::size_t>(it - generators_.begin());
  }
}

const GeneratorSet& canonical_generators() {
  static const GeneratorSet s({
      {LampConfig::delta(0, 1), 0},
      {LampConfig::delta(0, -1), 0},
      {{}, 1},
      {{}, -1},
  });
  return s;
}

GroupElement step(const GroupElement& g, std::size_t generator_index) {
  switch (generator_index) {
    case 0:
      return {g.lamps + LampConfig::delta(g.cursor, 1), g.cursor};
    case 1:
      return {g.lamps + LampConfig::delta(g.cursor, -1), g.cursor};
    case 2:
      return {g.lamps, checked::add(g.cursor, 1)};
    case 3:
      return {g.lamps, checked::sub(g.cursor, 1)};
    default:
      throw ValidationError("generator index out of range");
  }
}

std::string encode(const GroupElement& g) {
  std::string out = std::to_string(g.cursor);
  out += ';';
  bool first = true;
  for (const auto& [p, v] : g.lamps) {
    out += first ? " " : ", ";
    first = false;
    out += std::to_string(p);
    out += ':';
    out += std::to_string(v);
  }
  return out;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool done() const { return pos_ >= s_.size(); }
  std::size_t pos() const { return pos_; }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) throw ParseError(std::string("expected '") + c + "'", pos_);
  }

  Int integer() {
    skip_ws();
    std::size_t start = pos_;
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    Int value = 0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc::result_out_of_range) throw ParseError("integer out of range", start);
    if (ec != std::errc()) throw ParseError("expected integer", start);
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

GroupElement decode(std::string_view text) {
  Reader r(text);
  Int cursor = r.integer();
  r.expect(';');
  std::vector<LampConfig::Entry> entries;
  r.skip_ws();
  if (!r.done()) {
    do {
      std::size_t at = (r.skip_ws(), r.pos());
      Int p = r.integer();
      r.expect(':');
      Int v = r.integer();
      if (v == 0) throw ParseError("zero lamp value", at);
      if (!entries.empty() && p <= entries.back().first) throw ParseError("positions not strictly increasing", at);
      entries.emplace_back(p, v);
    } while (r.accept(','));
    r.skip_ws();
    if (!r.done()) throw ParseError("trailing characters", r.pos());
  }
  return {LampConfig::from_entries(std::move(entries)), cursor};
}

std::size_t hash_value(const GroupElement& g) noexcept {
  // splitmix-style mixing over cursor and entries
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  std::uint64_t h = mix(static_cast<std::uint64_t>(g.cursor));
  for (const auto& [p, v] : g.lamps) {
    h = mix(h ^ static_cast<std::uint64_t>(p));
    h = mix(h ^ static_cast<std::uint64_t>(v));
  }
  return static_cast<std::size_t>(h);
}

}  // namespace wreath
