#pragma once

#include <cmath>
#include <span>

namespace wreath {

/// Neumaier-compensated running sum.
template <typename Scalar>
class CompensatedSum {
 public:
  void add(Scalar x) {
    Scalar t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(Scalar x) {
    add(x);
    return *this;
  }
  Scalar value() const { return sum_ + carry_; }

 private:
  Scalar sum_{0};
  Scalar carry_{0};
};

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  double slope_stderr = 0;
};

/// Ordinary least squares y ~ intercept + slope * x. Throws EstimationError on
/// fewer than two points or constant x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

/// Fit of log(y) against log(x); all inputs must be positive.
LinearFit log_log_fit(std::span<const double> x, std::span<const double> y);

}  // namespace wreath
