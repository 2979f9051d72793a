#include "wreath/stats.hpp"

#include <Eigen/Dense>
#include <vector>

#include "wreath/errors.hpp"

namespace wreath {

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw EstimationError("least squares: size mismatch");
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n < 2) throw EstimationError("least squares: need at least two points");

  Eigen::Map<const Eigen::VectorXd> xs(x.data(), n);
  Eigen::Map<const Eigen::VectorXd> ys(y.data(), n);
  if ((xs.array() - xs.mean()).abs().maxCoeff() == 0.0) {
    throw EstimationError("least squares: degenerate abscissae");
  }

  Eigen::MatrixXd design(n, 2);
  design.col(0).setOnes();
  design.col(1) = xs;
  Eigen::Vector2d beta = design.colPivHouseholderQr().solve(ys);

  LinearFit fit;
  fit.intercept = beta(0);
  fit.slope = beta(1);
  Eigen::VectorXd resid = ys - design * beta;
  const double ss_res = resid.squaredNorm();
  const double ss_tot = (ys.array() - ys.mean()).matrix().squaredNorm();
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  if (n > 2) {
    const double sxx = (xs.array() - xs.mean()).matrix().squaredNorm();
    fit.slope_stderr = std::sqrt(ss_res / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

LinearFit log_log_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw EstimationError("log-log fit: size mismatch");
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw EstimationError("log-log fit: nonpositive value");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return least_squares(lx, ly);
}

}  // namespace wreath
