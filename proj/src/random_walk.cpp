#include "wreath/random_walk.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "wreath/errors.hpp"
#include "wreath/stats.hpp"
#include "wreath/word_metric.hpp"

namespace wreath {

std::string to_string(WalkGroup g) { return g == WalkGroup::Integers ? "z" : "zwrz"; }

WalkGroup parse_walk_group(const std::string& name) {
  if (name == "z") return WalkGroup::Integers;
  if (name == "zwrz") return WalkGroup::Lamplighter;
  throw ValidationError("unknown group '" + name + "' (expected z or zwrz)");
}

std::vector<Int> dyadic_times(int lo_exponent, int hi_exponent) {
  if (lo_exponent < 0 || hi_exponent < lo_exponent || hi_exponent > 40) {
    throw ValidationError("invalid dyadic exponent range");
  }
  std::vector<Int> t;
  for (int e = lo_exponent; e <= hi_exponent; ++e) t.push_back(Int{1} << e);
  return t;
}

namespace {

std::mt19937_64 trial_engine(std::uint64_t seed, Int trial) {
  const auto tr = static_cast<std::uint64_t>(trial);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tr), static_cast<std::uint32_t>(tr >> 32)};
  return std::mt19937_64(seq);
}

// Generator index for the next step: top bits of one 64-bit draw.
inline std::size_t draw_generator(std::mt19937_64& rng, WalkGroup group) {
  if (group == WalkGroup::Integers) return 2 + static_cast<std::size_t>(rng() >> 63);
  return static_cast<std::size_t>(rng() >> 62);
}

void validate_times(std::span<const Int> times) {
  if (times.empty()) throw ValidationError("time grid is empty");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0) throw ValidationError("times must be nonnegative");
    if (i > 0 && times[i] <= times[i - 1]) throw ValidationError("times must be strictly increasing");
  }
}

// One trial with a dense lamp array; distances go through word_length().
void run_trial(WalkGroup group, std::span<const Int> times, std::uint64_t seed, Int trial,
               DisplacementMatrix& out) {
  auto rng = trial_engine(seed, trial);
  const Int tmax = times.back();
  const Int offset = tmax;
  std::vector<Int> lamps(group == WalkGroup::Lamplighter ? static_cast<std::size_t>(2 * tmax + 1) : 0, 0);
  Int cursor = 0;
  Int lo = 0;
  Int hi = 0;
  Int t = 0;
  for (std::size_t col = 0; col < times.size(); ++col) {
    for (; t < times[col]; ++t) {
      switch (draw_generator(rng, group)) {
        case 0:
          ++lamps[static_cast<std::size_t>(cursor + offset)];
          break;
        case 1:
          --lamps[static_cast<std::size_t>(cursor + offset)];
          break;
        case 2:
          ++cursor;
          break;
        default:
          --cursor;
          break;
      }
      lo = std::min(lo, cursor);
      hi = std::max(hi, cursor);
    }
    GroupElement w;
    w.cursor = cursor;
    if (group == WalkGroup::Lamplighter) {
      std::vector<LampConfig::Entry> entries;
      for (Int j = lo; j <= hi; ++j) {
        Int v = lamps[static_cast<std::size_t>(j + offset)];
        if (v != 0) entries.emplace_back(j, v);
      }
      w.lamps = LampConfig::from_entries(std::move(entries));
    }
    out(trial, static_cast<Eigen::Index>(col)) = word_length(w).total;
  }
}

}  // namespace

WalkSample simulate(WalkGroup group, std::span<const Int> times, Int trials, std::uint64_t seed,
                    unsigned workers) {
  validate_times(times);
  if (trials < 1) throw ValidationError("trials must be at least 1");
  if (times.back() > (Int{1} << 30)) throw ResourceLimit("time horizon too large");

  WalkSample sample;
  sample.group = group;
  sample.times.assign(times.begin(), times.end());
  sample.seed = seed;
  sample.displacements.resize(trials, static_cast<Eigen::Index>(times.size()));

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<Int>(workers, trials));
  if (workers <= 1) {
    for (Int i = 0; i < trials; ++i) run_trial(group, times, seed, i, sample.displacements);
    return sample;
  }
  // Each worker owns a disjoint set of rows.
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (Int i = w; i < trials; i += workers) run_trial(group, times, seed, i, sample.displacements);
    });
  }
  for (auto& th : pool) th.join();
  return sample;
}

GroupElement walk_endpoint(WalkGroup group, Int t, std::uint64_t seed, Int trial) {
  auto rng = trial_engine(seed, trial);
  GroupElement w;
  for (Int i = 0; i < t; ++i) w = step(w, draw_generator(rng, group));
  return w;
}

std::vector<double> WalkSample::mean_displacement() const {
  std::vector<double> m(times.size());
  for (std::size_t c = 0; c < times.size(); ++c) {
    m[c] = displacements.col(static_cast<Eigen::Index>(c)).cast<double>().mean();
  }
  return m;
}

std::vector<double> WalkSample::median_displacement() const {
  std::vector<double> med(times.size());
  for (std::size_t c = 0; c < times.size(); ++c) {
    std::vector<Int> col(static_cast<std::size_t>(trials()));
    for (Eigen::Index r = 0; r < trials(); ++r) col[static_cast<std::size_t>(r)] = displacements(r, c);
    std::sort(col.begin(), col.end());
    const std::size_t n = col.size();
    med[c] = n % 2 ? static_cast<double>(col[n / 2]) : 0.5 * static_cast<double>(col[n / 2 - 1] + col[n / 2]);
  }
  return med;
}

BetaEstimate estimate_beta(const WalkSample& sample) {
  const auto mean = sample.mean_displacement();
  std::vector<double> x, y;
  for (std::size_t c = 0; c < sample.times.size(); ++c) {
    if (sample.times[c] > 0 && mean[c] > 0) {
      x.push_back(static_cast<double>(sample.times[c]));
      y.push_back(mean[c]);
    }
  }
  if (x.size() < 4) throw EstimationError("estimate_beta needs at least four times with positive mean displacement");
  const LinearFit fit = log_log_fit(x, y);
  return {fit.slope, fit.intercept, fit.r2, fit.slope_stderr};
}

TailEstimate estimate_tail(const WalkSample& sample, double c, double beta) {
  if (!(c > 0) || !std::isfinite(c)) throw ValidationError("tail constant c must be positive");
  if (!(beta > 0 && beta <= 1)) throw ValidationError("beta must lie in (0, 1]");
  TailEstimate est;
  est.c = c;
  est.beta = beta;
  est.times = sample.times;
  const double n = static_cast<double>(sample.trials());
  for (std::size_t col = 0; col < sample.times.size(); ++col) {
    const double threshold = c * std::pow(static_cast<double>(sample.times[col]), beta);
    Int hits = 0;
    for (Eigen::Index r = 0; r < sample.trials(); ++r) {
      if (static_cast<double>(sample.displacements(r, static_cast<Eigen::Index>(col))) >= threshold) ++hits;
    }
    const double p = static_cast<double>(hits) / n;
    est.delta_hat.push_back(p);
    est.standard_errors.push_back(std::sqrt(p * (1 - p) / n));
  }
  return est;
}

double rule_constant(const WalkSample& sample, double beta, Int reference_time) {
  auto it = std::find(sample.times.begin(), sample.times.end(), reference_time);
  if (it == sample.times.end() || reference_time <= 0) {
    throw ValidationError("reference time " + std::to_string(reference_time) + " is not in the sample grid");
  }
  const auto med = sample.median_displacement();
  const double m = med[static_cast<std::size_t>(it - sample.times.begin())];
  if (!(m > 0)) throw EstimationError("median displacement at reference time is zero");
  return 0.5 * m / std::pow(static_cast<double>(reference_time), beta);
}

}  // namespace wreath
