#pragma once

#include <Eigen/Core>

namespace racegp {

/// sqrt(mean((y - yhat)^2)). Throws LengthMismatch on differing or empty input.
double rmse(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

/// 1 - SS_res / SS_tot with the mean of y. Needs n >= 2; throws ConstantTarget
/// when y has no spread.
double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

/// 1 - Var(y - yhat) / Var(y). Same preconditions as r_squared.
double explained_variance(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

}  // namespace racegp
