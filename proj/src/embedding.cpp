#include "wreath/embedding.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "wreath/errors.hpp"
#include "wreath/random_walk.hpp"
#include "wreath/stats.hpp"
#include "wreath/word_metric.hpp"

namespace wreath {

void validate_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) throw ValidationError("alpha must lie in the open interval (0, 1/2)");
}

namespace {

void validate_eps(double eps) {
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  if (eps < kMinEps) throw ValidationError("eps below the supported floor of 1e-9");
}

inline double powd(Int base, double alpha) { return std::pow(static_cast<double>(base), alpha); }

// (u + gap)^a - u^a without cancellation, u > 0.
inline double cursor_gap_difference(Int u, Int gap, double alpha) {
  const double ud = static_cast<double>(u);
  return std::pow(ud, alpha) * std::expm1(alpha * std::log1p(static_cast<double>(gap) / ud));
}

// One half-line side, written for right half-lines; left half-lines are
// handled by mirroring positions.
struct SideInput {
  Int k1 = 0;
  Int k2 = 0;
  std::optional<Int> last_diff;  // largest position where the two lamp functions differ
};

struct SidePlan {
  Int kmin = 0;
  Int kmax = 0;
  Int gap = 0;
  Int cutoff = 0;  // N
};

SidePlan plan_side(const SideInput& in, Int multiplier) {
  SidePlan p;
  p.kmin = std::min(in.k1, in.k2);
  p.kmax = std::max(in.k1, in.k2);
  p.gap = checked::sub(p.kmax, p.kmin);
  Int explicit_end = p.kmax;
  if (p.gap > 0) {
    const Int u0 = std::max<Int>(4 * p.gap, 16) * std::max<Int>(multiplier, 1);
    explicit_end = checked::add(p.kmax, u0 - 1);
  }
  p.cutoff = std::max(explicit_end, in.last_diff.value_or(p.kmin));
  return p;
}

double side_explicit(const SideInput& in, const SidePlan& plan, double alpha) {
  CompensatedSum<double> acc;
  for (Int n = plan.kmin + 1; n <= plan.cutoff; ++n) {
    const double ca = n > in.k1 ? powd(n - in.k1, alpha) : 0.0;
    const double cb = n > in.k2 ? powd(n - in.k2, alpha) : 0.0;
    if (in.last_diff && n <= *in.last_diff) {
      acc += ca * ca + cb * cb;  // distinct keys
    } else if (n > plan.kmax && plan.gap > 0) {
      const double h = cursor_gap_difference(n - plan.kmax, plan.gap, alpha);
      acc += h * h;
    } else {
      acc += (ca - cb) * (ca - cb);
    }
  }
  return acc.value();
}

TailDescriptor side_tail(const SidePlan& plan, HalfLine side, double alpha, double target) {
  TailDescriptor t;
  t.side = side;
  t.cutoff = plan.cutoff;
  t.cursor_gap = plan.gap;
  if (plan.gap == 0) return t;
  const Int u0 = plan.cutoff - plan.kmax + 1;
  const TailSum s = certified_tail(plan.gap, u0, alpha, target);
  t.estimate = s.estimate;
  t.error = s.error;
  const double g = static_cast<double>(plan.gap);
  t.crude_bound = alpha * alpha * g * g * std::pow(static_cast<double>(u0 - 1), 2 * alpha - 1) / (1 - 2 * alpha);
  return t;
}

SideInput right_side(const GroupElement& a, const GroupElement& b, const LampConfig& diff) {
  SideInput s{a.cursor, b.cursor, std::nullopt};
  if (!diff.empty()) s.last_diff = diff.max_position();
  return s;
}

SideInput left_side_mirrored(const GroupElement& a, const GroupElement& b, const LampConfig& diff) {
  SideInput s{checked::neg(a.cursor), checked::neg(b.cursor), std::nullopt};
  if (!diff.empty()) s.last_diff = checked::neg(diff.min_position());
  return s;
}

// Bernoulli numbers B_2 .. B_14.
constexpr std::array<double, 7> kBernoulli = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730, 7.0 / 6};

// q^s * zeta(s, q) for integer q >= 16, s > 1, with the Euler-Maclaurin
// remainder bounded by the first omitted term (u^-s is completely monotone).
struct ScaledZeta {
  double value;
  double error;
};

ScaledZeta scaled_hurwitz_zeta(double s, double q) {
  double value = q / (s - 1) + 0.5;
  double rising = s;  // (s)_{2j-1}
  double factorial = 2;  // (2j)!
  double qpow = 1.0 / q;  // q^{-(2j-1)}
  for (std::size_t j = 1; j <= 6; ++j) {
    value += kBernoulli[j - 1] / factorial * rising * qpow;
    rising *= (s + 2 * j - 1) * (s + 2 * j);
    factorial *= static_cast<double>((2 * j + 1) * (2 * j + 2));
    qpow /= q * q;
  }
  return {value, std::abs(kBernoulli[6] / factorial * rising * qpow)};
}

}  // namespace

TailSum certified_tail(Int gap, Int u0, double alpha, double target) {
  validate_alpha(alpha);
  if (gap < 0) throw ValidationError("cursor gap must be nonnegative");
  if (gap == 0) return {};
  if (u0 < 4 * gap || u0 < 16) throw ValidationError("tail expansion needs u0 >= max(4 gap, 16)");
  if (!(target > 0)) throw ValidationError("tail target must be positive");

  const double q = static_cast<double>(u0);
  const double r = static_cast<double>(gap) / q;
  const double scale = std::pow(q, 2 * alpha);
  // binomial(alpha, i), i >= 1
  std::vector<double> binom{0.0, alpha};
  CompensatedSum<double> est;
  double err = 0;
  double rpow = r;
  TailSum out;
  constexpr int kMaxTerms = 400;
  for (int m = 2; m <= kMaxTerms; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    binom.push_back(binom[mi - 1] * (alpha - static_cast<double>(m - 1)) / static_cast<double>(m));
    double e = 0;
    for (std::size_t i = 1; i < mi; ++i) e += binom[i] * binom[mi - i];
    rpow *= r;
    const ScaledZeta z = scaled_hurwitz_zeta(static_cast<double>(m) - 2 * alpha, q);
    est += e * rpow * z.value;
    err += std::abs(e) * rpow * z.error;
    out.terms = m - 1;
    // |e_k| <= 2 a^2 and q^s zeta(s, q) <= q + 1 for every later k
    const double remainder = 2 * alpha * alpha * (q + 1) * rpow * r / (1 - r);
    if (scale * (err + remainder) <= target || m == kMaxTerms) {
      err += remainder;
      break;
    }
  }
  out.estimate = scale * est.value();
  out.error = scale * err;
  return out;
}

void EmbeddingKey::validate() const {
  if (restriction.empty()) return;
  if (side == HalfLine::Right && restriction.min_position() < endpoint) {
    throw ValidationError("key restriction leaves the half-line [" + std::to_string(endpoint) + ", inf)");
  }
  if (side == HalfLine::Left && restriction.max_position() > endpoint) {
    throw ValidationError("key restriction leaves the half-line (-inf, " + std::to_string(endpoint) + "]");
  }
}

std::string EmbeddingKey::describe() const {
  std::string s = side == HalfLine::Right ? "[" + std::to_string(endpoint) + ",inf)"
                                          : "(-inf," + std::to_string(endpoint) + "]";
  return s + "|" + encode({restriction, 0}).substr(2);
}

double SparseHilbertVector::explicit_norm_squared() const {
  CompensatedSum<double> acc;
  for (const auto& [k, v] : coefficients) acc += v * v;
  return acc.value();
}

double SparseHilbertVector::tail_estimate() const {
  double s = 0;
  for (const auto& t : tails) s += t.estimate;
  return s;
}

double SparseHilbertVector::tail_error() const {
  double s = 0;
  for (const auto& t : tails) s += t.error;
  return s;
}

double phi_coefficient(const LampConfig& f, Int k, const EmbeddingKey& key, double alpha) {
  validate_alpha(alpha);
  key.validate();
  const Int n = key.endpoint;
  if (key.side == HalfLine::Right) {
    if (n > k && key.restriction == f.restrict_from(n)) return powd(n - k, alpha);
  } else {
    if (n < k && key.restriction == f.restrict_to(n)) return powd(k - n, alpha);
  }
  return 0.0;
}

SparseHilbertVector phi_difference(const GroupElement& a, const GroupElement& b, double alpha, double eps,
                                   Int cutoff_multiplier) {
  validate_alpha(alpha);
  validate_eps(eps);
  const LampConfig diff = a.lamps - b.lamps;
  SparseHilbertVector v;
  auto add = [&](EmbeddingKey key, double c) {
    if (c == 0.0) return;
    auto [it, fresh] = v.coefficients.try_emplace(std::move(key), c);
    if (!fresh) {
      it->second += c;
      if (it->second == 0.0) v.coefficients.erase(it);
    }
  };

  const SideInput right = right_side(a, b, diff);
  const SidePlan rp = plan_side(right, cutoff_multiplier);
  for (Int n = rp.kmin + 1; n <= rp.cutoff; ++n) {
    if (n > a.cursor) add({HalfLine::Right, n, a.lamps.restrict_from(n)}, powd(n - a.cursor, alpha));
    if (n > b.cursor) add({HalfLine::Right, n, b.lamps.restrict_from(n)}, -powd(n - b.cursor, alpha));
  }
  const SideInput left = left_side_mirrored(a, b, diff);
  const SidePlan lp = plan_side(left, cutoff_multiplier);
  for (Int m = lp.kmin + 1; m <= lp.cutoff; ++m) {
    const Int n = -m;
    if (n < a.cursor) add({HalfLine::Left, n, a.lamps.restrict_to(n)}, powd(a.cursor - n, alpha));
    if (n < b.cursor) add({HalfLine::Left, n, b.lamps.restrict_to(n)}, -powd(b.cursor - n, alpha));
  }
  const double target = eps * eps / 4;
  v.tails.push_back(side_tail(rp, HalfLine::Right, alpha, target));
  v.tails.push_back(side_tail(lp, HalfLine::Left, alpha, target));
  return v;
}

EmbeddingDistance f_alpha_distance(const GroupElement& a, const GroupElement& b, double alpha, double eps,
                                   Int cutoff_multiplier) {
  validate_alpha(alpha);
  validate_eps(eps);
  EmbeddingDistance out;
  if (a == b) return out;

  const LampConfig diff = a.lamps - b.lamps;
  const double dk = static_cast<double>(checked::sub(a.cursor, b.cursor));
  out.cursor_part = dk * dk;
  out.lamp_part = static_cast<double>(diff.sum_of_squares());

  const double target = eps * eps / 4;
  const SideInput right = right_side(a, b, diff);
  const SidePlan rp = plan_side(right, cutoff_multiplier);
  const SideInput left = left_side_mirrored(a, b, diff);
  const SidePlan lp = plan_side(left, cutoff_multiplier);
  out.phi_explicit = side_explicit(right, rp, alpha) + side_explicit(left, lp, alpha);
  out.right_tail = side_tail(rp, HalfLine::Right, alpha, target);
  out.left_tail = side_tail(lp, HalfLine::Left, alpha, target);

  const double norm2 =
      out.cursor_part + out.lamp_part + out.phi_explicit + out.right_tail.estimate + out.left_tail.estimate;
  const double tail_err = out.right_tail.error + out.left_tail.error;
  out.value = std::sqrt(norm2);
  out.error_bound = tail_err > 0 ? out.value - std::sqrt(std::max(0.0, norm2 - tail_err)) : 0.0;
  return out;
}

LipschitzAudit lipschitz_audit(double alpha, double eps) {
  LipschitzAudit audit;
  for (const auto& s : canonical_generators()) {
    auto d = f_alpha_distance(s, GroupElement::identity(), alpha, eps);
    if (d.value > audit.lipschitz) {
      audit.lipschitz = d.value;
      audit.error_bound = d.error_bound;
    }
    audit.generators.push_back(d);
  }
  return audit;
}

double compression_exponent(double alpha) { return (2 * alpha + 1) / (2 * alpha + 2); }

std::string to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::Ball:
      return "ball";
    case SamplerKind::Cursor:
      return "cursor";
    case SamplerKind::Lamp:
      return "lamp";
    case SamplerKind::Balanced:
      return "balanced";
    case SamplerKind::Walk:
      return "walk";
  }
  return "unknown";
}

SamplerKind parse_sampler_kind(const std::string& name) {
  for (auto k : {SamplerKind::Ball, SamplerKind::Cursor, SamplerKind::Lamp, SamplerKind::Balanced, SamplerKind::Walk}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown sampler '" + name + "'");
}

GroupElement even_spread(Int m, Int distance) {
  if (m < 1) throw ValidationError("spread must be at least 1");
  const Int sites = 2 * m + 1;
  const Int mass = distance - 4 * m;
  if (mass < sites) throw ValidationError("distance too small to light every site of [-m, m]");
  const Int q = mass / sites;
  const Int extra = mass % sites;
  std::vector<LampConfig::Entry> entries;
  // sites in order 0, 1, -1, 2, -2, ...; the first `extra` get one more unit
  for (Int i = 0; i < sites; ++i) {
    const Int pos = (i % 2 == 1) ? (i + 1) / 2 : -(i / 2);
    entries.emplace_back(pos, q + (i < extra ? 1 : 0));
  }
  return {LampConfig::from_entries(std::move(entries)), 0};
}

std::vector<GroupElement> balanced_family(double alpha, Int max_distance) {
  validate_alpha(alpha);
  std::vector<GroupElement> out;
  for (Int d = 8; d <= max_distance; ++d) {
    std::optional<GroupElement> best;
    double best_norm = 0;
    for (Int m = 1; 6 * m + 1 <= d; ++m) {
      GroupElement g = even_spread(m, d);
      const double n = f_alpha_distance(g, GroupElement::identity(), alpha, 1e-6).value;
      if (!best || n < best_norm) {
        best = std::move(g);
        best_norm = n;
      }
    }
    if (best) out.push_back(std::move(*best));
  }
  return out;
}

namespace {

std::vector<GroupElement> evenly_spaced(std::vector<GroupElement> family, Int count) {
  if (count <= 0 || static_cast<std::size_t>(count) >= family.size()) return family;
  std::vector<GroupElement> out;
  const double stride = static_cast<double>(family.size() - 1) / static_cast<double>(count - 1);
  for (Int i = 0; i < count; ++i) {
    out.push_back(family[static_cast<std::size_t>(std::llround(stride * static_cast<double>(i)))]);
  }
  return out;
}

}  // namespace

std::vector<GroupElement> sample_elements(const SamplerSpec& spec, double alpha, Int count, std::uint64_t seed) {
  if (count < 1) throw ValidationError("sample count must be positive");
  std::vector<GroupElement> out;
  switch (spec.kind) {
    case SamplerKind::Ball: {
      auto all = ball_elements(ball(spec.size));
      all.erase(all.begin());  // identity comes first
      if (static_cast<std::size_t>(count) < all.size()) {
        std::mt19937_64 rng(seed);
        std::shuffle(all.begin(), all.end(), rng);
        all.resize(static_cast<std::size_t>(count));
        std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
          return std::pair(word_length(x).total, x) < std::pair(word_length(y).total, y);
        });
      }
      return all;
    }
    case SamplerKind::Cursor:
      for (Int k = 1; k <= count; ++k) out.push_back({{}, k});
      return out;
    case SamplerKind::Lamp: {
      if (spec.size < 0) throw ValidationError("lamp spread must be nonnegative");
      for (Int v = 1; v <= count; ++v) {
        std::vector<LampConfig::Entry> entries;
        for (Int j = -spec.size; j <= spec.size; ++j) entries.emplace_back(j, v);
        out.push_back({LampConfig::from_entries(std::move(entries)), 0});
      }
      return out;
    }
    case SamplerKind::Balanced:
      return evenly_spaced(balanced_family(alpha, spec.size), count);
    case SamplerKind::Walk: {
      if (spec.size < 1) throw ValidationError("walk length must be positive");
      for (Int trial = 0; static_cast<Int>(out.size()) < count; ++trial) {
        GroupElement g = walk_endpoint(WalkGroup::Lamplighter, spec.size, seed, trial);
        if (!g.is_identity()) out.push_back(std::move(g));
      }
      return out;
    }
  }
  return out;
}

CompressionReport compression_scan(double alpha, std::span<const GroupElement> elements, double eps) {
  validate_alpha(alpha);
  validate_eps(eps);
  CompressionReport rep;
  rep.alpha = alpha;
  rep.target_exponent = compression_exponent(alpha);
  std::vector<double> xs, ys;
  for (const auto& g : elements) {
    const Int d = word_length(g).total;
    if (d < 1) throw ValidationError("compression scan samples must differ from the identity");
    const auto fd = f_alpha_distance(g, GroupElement::identity(), alpha, eps);
    rep.observations.push_back({d, fd.value, fd.error_bound});
    xs.push_back(static_cast<double>(d));
    ys.push_back(fd.value);
  }
  if (rep.observations.empty()) throw EstimationError("compression scan has no observations");
  if (std::adjacent_find(xs.begin(), xs.end(), std::not_equal_to<>()) == xs.end()) {
    throw EstimationError("all sampled elements have the same word length");
  }
  const LinearFit fit = log_log_fit(xs, ys);
  rep.fitted_exponent = fit.slope;
  rep.fitted_intercept = fit.intercept;
  rep.fitted_r2 = fit.r2;
  rep.fitted_lower_constant = std::numeric_limits<double>::infinity();
  for (const auto& o : rep.observations) {
    const double d = static_cast<double>(o.distance);
    rep.fitted_lower_constant = std::min(rep.fitted_lower_constant, o.norm / std::pow(d, rep.target_exponent));
    rep.lipschitz_max = std::max(rep.lipschitz_max, o.norm / d);
  }
  return rep;
}

CompressionReport compression_scan(double alpha, const SamplerSpec& sampler, Int count, double eps,
                                   std::uint64_t seed) {
  if (count < 10) throw ValidationError("compression scan needs count >= 10");
  const auto elements = sample_elements(sampler, alpha, count, seed);
  return compression_scan(alpha, elements, eps);
}

LowerBoundAudit lower_bound_audit(const GroupElement& g, double alpha, double eps) {
  const auto fd = f_alpha_distance(g, GroupElement::identity(), alpha, eps);
  const auto prof = lower_bound_profile(g);
  LowerBoundAudit a;
  a.norm2 = fd.norm_squared();
  a.k_term = static_cast<double>(prof.k) * static_cast<double>(prof.k);
  a.lamp_term = static_cast<double>(g.lamps.sum_of_squares());
  CompensatedSum<double> travel;
  for (Int l = 1; l <= prof.m; ++l) travel += powd(l, 2 * alpha);
  a.travel_term = travel.value();
  a.rhs = std::pow(static_cast<double>(word_length(g).total), (4 * alpha + 2) / (2 * alpha + 2));

  // norm2 is certified to within 2 value error_bound (+ rounding)
  const double slack = 2 * fd.value * fd.error_bound + 1e-12 * std::max(1.0, a.norm2);
  for (const auto& [name, term] : {std::pair{"k^2", a.k_term}, std::pair{"sum f^2", a.lamp_term},
                                   std::pair{"sum l^(2a)", a.travel_term}}) {
    if (a.norm2 + slack < term) {
      throw AssertionFailure("lower bound ingredient " + std::string(name) + " exceeds |F_alpha|^2 at " + encode(g));
    }
  }
  return a;
}

EmpiricalCompression::EmpiricalCompression(std::span<const Observation> observations, double scale) {
  if (!(scale > 0)) throw ValidationError("scale must be positive");
  std::map<Int, double> best;
  for (const auto& o : observations) {
    auto [it, fresh] = best.try_emplace(o.distance, o.norm * scale);
    if (!fresh) it->second = std::min(it->second, o.norm * scale);
  }
  for (const auto& [d, v] : best) {
    distances_.push_back(d);
    suffix_min_.push_back(v);
  }
  for (std::size_t i = suffix_min_.size(); i-- > 1;) suffix_min_[i - 1] = std::min(suffix_min_[i - 1], suffix_min_[i]);
}

std::optional<double> EmpiricalCompression::operator()(double s) const {
  auto it = std::lower_bound(distances_.begin(), distances_.end(), s,
                             [](Int d, double x) { return static_cast<double>(d) < x; });
  if (it == distances_.end()) return std::nullopt;
  return suffix_min_[static_cast<std::size_t>(it - distances_.begin())];
}

}  // namespace wreath
