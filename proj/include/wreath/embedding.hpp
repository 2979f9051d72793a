#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wreath/group.hpp"

namespace wreath {

/// Coordinates of the orthonormal system {v_g}: one unit vector per half-line
/// [n, inf) or (-inf, n] and finitely supported function on it.
enum class HalfLine { Right, Left };

struct EmbeddingKey {
  HalfLine side = HalfLine::Right;
  Int endpoint = 0;
  LampConfig restriction;

  /// Throws ValidationError if the restriction is not supported on the half-line.
  void validate() const;
  std::string describe() const;

  friend bool operator==(const EmbeddingKey&, const EmbeddingKey&) = default;
  friend auto operator<=>(const EmbeddingKey&, const EmbeddingKey&) = default;
};

/// Certified description of the infinite coefficient family
/// (n - k_min)^a - (n - k_max)^a on zero-restriction keys beyond the cutoff.
struct TailDescriptor {
  HalfLine side = HalfLine::Right;
  Int cutoff = 0;        // explicit keys stop here; the tail starts one step beyond
  Int cursor_gap = 0;    // |k_1 - k_2|
  double estimate = 0;   // sum of squared tail coefficients
  double error = 0;      // |true tail - estimate| <= error
  double crude_bound = 0;  // a^2 gap^2 (N - K)^(2a - 1) / (1 - 2a)
};

struct SparseHilbertVector {
  std::map<EmbeddingKey, double> coefficients;  // nonzero entries only
  std::vector<TailDescriptor> tails;

  double explicit_norm_squared() const;
  double tail_estimate() const;
  double tail_error() const;
};

/// Smallest accepted precision target.
inline constexpr double kMinEps = 1e-9;

void validate_alpha(double alpha);

/// Coefficient of v_key in phi_alpha(f, k).
double phi_coefficient(const LampConfig& f, Int k, const EmbeddingKey& key, double alpha);

/// sum_{u >= u0} ((u + gap)^a - u^a)^2 with a certified error, by expanding in
/// powers of gap/u and summing each Hurwitz zeta term with Euler-Maclaurin.
/// Requires u0 >= max(4 gap, 16).
struct TailSum {
  double estimate = 0;
  double error = 0;
  int terms = 0;
};
TailSum certified_tail(Int gap, Int u0, double alpha, double target);

/// Materialized phi_alpha(a) - phi_alpha(b): explicit keys up to the cutoffs
/// plus two tail descriptors (right and left).
SparseHilbertVector phi_difference(const GroupElement& a, const GroupElement& b, double alpha, double eps,
                                   Int cutoff_multiplier = 1);

struct EmbeddingDistance {
  double value = 0;        // |F_alpha(a) - F_alpha(b)|
  double error_bound = 0;  // |true - value| <= error_bound <= eps
  double cursor_part = 0;  // (k_1 - k_2)^2
  double lamp_part = 0;    // sum (f_1 - f_2)^2
  double phi_explicit = 0;
  TailDescriptor right_tail;
  TailDescriptor left_tail;

  double norm_squared() const { return value * value; }
};

/// |F_alpha(a) - F_alpha(b)| where F_alpha(f, k) = k + f + (phi_alpha(f, k) - phi_alpha(0, 0)).
/// `cutoff_multiplier` scales the explicit range before the tail expansion.
EmbeddingDistance f_alpha_distance(const GroupElement& a, const GroupElement& b, double alpha, double eps,
                                   Int cutoff_multiplier = 1);

struct LipschitzAudit {
  double lipschitz = 0;  // max over generators of |F_alpha(s)|
  double error_bound = 0;
  std::vector<EmbeddingDistance> generators;  // canonical_generators() order
};

LipschitzAudit lipschitz_audit(double alpha, double eps);

/// Absolute constant C with lipschitz^2 <= 1 + C / (1 - 2 alpha) for every alpha in (0, 1/2).
inline constexpr double kLipschitzConstantC = 3.0;

/// (2a + 1) / (2a + 2)
double compression_exponent(double alpha);

enum class SamplerKind { Ball, Cursor, Lamp, Balanced, Walk };

std::string to_string(SamplerKind k);
SamplerKind parse_sampler_kind(const std::string& name);

struct SamplerSpec {
  SamplerKind kind = SamplerKind::Ball;
  Int size = 6;  // ball radius | spread m | max distance | walk length (cursor family has no size)
};

/// Zero cursor, support [-m, m] with both ends lit, total mass `distance - 4m`
/// spread as evenly as possible; distance exactly `distance`.
GroupElement even_spread(Int m, Int distance);

/// For each distance d in [8, max_distance], the even spread of word length d
/// with the smallest F_alpha norm.
std::vector<GroupElement> balanced_family(double alpha, Int max_distance);

/// Deterministic families take an evenly spaced subset when `count` is
/// smaller than the family; ball samples are subsampled with `seed`.
std::vector<GroupElement> sample_elements(const SamplerSpec& spec, double alpha, Int count, std::uint64_t seed);

struct Observation {
  Int distance = 0;
  double norm = 0;
  double error_bound = 0;
};

struct CompressionReport {
  double alpha = 0;
  double target_exponent = 0;  // (2a + 1) / (2a + 2)
  std::vector<Observation> observations;
  double fitted_exponent = 0;
  double fitted_intercept = 0;
  double fitted_r2 = 0;
  double fitted_lower_constant = 0;  // min norm / d^target_exponent
  double lipschitz_max = 0;          // max norm / d
};

CompressionReport compression_scan(double alpha, std::span<const GroupElement> elements, double eps);

/// Sampler front end; requires count >= 10.
CompressionReport compression_scan(double alpha, const SamplerSpec& sampler, Int count, double eps,
                                   std::uint64_t seed);

struct LowerBoundAudit {
  double norm2 = 0;
  double k_term = 0;       // k^2
  double lamp_term = 0;    // sum f(j)^2
  double travel_term = 0;  // sum_{l=1}^m l^(2a)
  double rhs = 0;          // d^((4a + 2) / (2a + 2))
};

/// Throws AssertionFailure if norm2 falls below any single ingredient.
LowerBoundAudit lower_bound_audit(const GroupElement& g, double alpha, double eps);

/// rho_hat(s) = min{ norm : distance >= s } over a finite observation set;
/// an upper bound for the true compression function at s.
class EmpiricalCompression {
 public:
  explicit EmpiricalCompression(std::span<const Observation> observations, double scale = 1.0);

  /// nullopt when no observation reaches distance s.
  std::optional<double> operator()(double s) const;
  Int max_distance() const { return distances_.empty() ? 0 : distances_.back(); }

 private:
  std::vector<Int> distances_;     // sorted ascending, unique
  std::vector<double> suffix_min_;  // min scaled norm over distance >= distances_[i]
};

}  // namespace wreath
