#include "racegp/metrics.hpp"

#include <cmath>
#include <string>

#include "racegp/errors.hpp"

namespace racegp {

namespace {

void check_pair(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat, Eigen::Index min_size) {
  if (y.size() != yhat.size()) {
    throw LengthMismatch("metric inputs differ in length (" + std::to_string(y.size()) + " vs " +
                         std::to_string(yhat.size()) + ")");
  }
  if (y.size() < min_size) {
    throw LengthMismatch("metric needs at least " + std::to_string(min_size) + " values");
  }
}

double total_sum_of_squares(const Eigen::VectorXd& y) {
  const double ss = (y.array() - y.mean()).square().sum();
  if (!(ss > 0.0)) throw ConstantTarget("target has zero variance");
  return ss;
}

}  // namespace

double rmse(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  check_pair(y, yhat, 1);
  return std::sqrt((y - yhat).squaredNorm() / static_cast<double>(y.size()));
}

double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  check_pair(y, yhat, 2);
  const double ss_tot = total_sum_of_squares(y);
  return 1.0 - (y - yhat).squaredNorm() / ss_tot;
}

double explained_variance(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  check_pair(y, yhat, 2);
  const double ss_tot = total_sum_of_squares(y);
  const Eigen::VectorXd r = y - yhat;
  return 1.0 - (r.array() - r.mean()).square().sum() / ss_tot;
}

}  // namespace racegp
