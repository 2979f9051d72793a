#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wreath/group.hpp"

namespace wreath {

/// Groups on which the canonical simple random walk is simulated.
enum class WalkGroup {
  Integers,     // Z with generators {+1, -1}
  Lamplighter,  // Z wr Z with canonical_generators()
};

std::string to_string(WalkGroup g);
WalkGroup parse_walk_group(const std::string& name);  // "z" | "zwrz"

using DisplacementMatrix = Eigen::Matrix<Int, Eigen::Dynamic, Eigen::Dynamic>;

struct WalkSample {
  WalkGroup group = WalkGroup::Integers;
  std::vector<Int> times;
  DisplacementMatrix displacements;  // trials x times, entry = d(W_t, e)
  std::uint64_t seed = 0;

  Eigen::Index trials() const { return displacements.rows(); }
  std::vector<double> mean_displacement() const;
  std::vector<double> median_displacement() const;
};

/// t = 2^lo, 2^(lo+1), ..., 2^hi
std::vector<Int> dyadic_times(int lo_exponent, int hi_exponent);

/// Runs `trials` independent walks; trial i draws from a generator seeded by
/// (seed, i) only, so the result does not depend on `workers`.
WalkSample simulate(WalkGroup group, std::span<const Int> times, Int trials, std::uint64_t seed,
                    unsigned workers = 0);

/// Endpoint W_t of one trial, built by repeated right multiplication with
/// step(). Uses the same random stream as simulate().
GroupElement walk_endpoint(WalkGroup group, Int t, std::uint64_t seed, Int trial);

struct BetaEstimate {
  double beta = 0;
  double intercept = 0;
  double r2 = 0;
  double beta_stderr = 0;
};

/// Least-squares slope of log(mean displacement) against log(t), over times
/// t > 0 with positive mean. Needs at least four such times.
BetaEstimate estimate_beta(const WalkSample& sample);

struct TailEstimate {
  double c = 0;
  double beta = 0;
  std::vector<Int> times;
  std::vector<double> delta_hat;        // Pr(d(W_t, e) >= c t^beta)
  std::vector<double> standard_errors;  // binomial, sqrt(p(1-p)/trials)
};

TailEstimate estimate_tail(const WalkSample& sample, double c, double beta);

/// Half of median(d(W_ref, e)) / ref^beta; `reference_time` must be sampled.
double rule_constant(const WalkSample& sample, double beta, Int reference_time);

}  // namespace wreath
