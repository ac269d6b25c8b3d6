#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "racegp/datagen.hpp"
#include "racegp/dynamics.hpp"
#include "racegp/gp.hpp"

namespace racegp {

inline constexpr int kFeatureCount = 4;

/// Per-column shift/scale. A column with (near) zero spread keeps scale 1.
struct Standardizer {
  Eigen::VectorXd shift;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& X);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

struct ErrorFitOptions {
  int budget = 300;  // per output
  int restarts = 5;
  std::uint64_t seed = 0;
  double noise_floor = kNoiseFloor;
  double initial_noise2 = 0.01;  // in standardized target units
};

/// Two independent GPs for the omega and beta residuals over the features
/// (omega, beta, a_long, delta_v). Both work in standardized units and share
/// the training inputs and the feature normalizer.
struct ErrorGP {
  std::string combo;
  Standardizer features;
  double omega_shift = 0.0, omega_scale = 1.0;
  double beta_shift = 0.0, beta_scale = 1.0;
  GPModel gp_omega;
  GPModel gp_beta;
  double train_time_s = 0.0;
  int evaluations = 0;
  std::string data_hash;  // fnv1a of the standardized training set
};

ErrorGP fit_error_model(const std::vector<ErrorSample>& errs, const std::string& combo,
                        SizeFraction fraction, const ErrorFitOptions& options = {});

/// Fit with fixed hyperparameters, no search. Used for reloading and tests.
ErrorGP assemble_error_model(const std::string& combo, Standardizer features,
                             std::array<double, 4> target_scaling, Eigen::MatrixXd Xn,
                             Eigen::VectorXd yn_omega, Eigen::VectorXd yn_beta,
                             const KernelExpr& k_omega, double noise_omega,
                             const KernelExpr& k_beta, double noise_beta);

struct ErrorPrediction {
  Eigen::VectorXd mean_omega, var_omega;
  Eigen::VectorXd mean_beta, var_beta;
  std::size_t clipped = 0;
};

/// Predictions in physical units.
ErrorPrediction predict_errors(const ErrorGP& eg, const Eigen::MatrixXd& features);

Eigen::MatrixXd feature_matrix(const std::vector<ErrorSample>& errs);
Eigen::VectorXd omega_targets(const std::vector<ErrorSample>& errs);
Eigen::VectorXd beta_targets(const std::vector<ErrorSample>& errs);

/// E-Kin step plus the predicted mean residual on omega and beta.
VehicleState corrected_step(const VehicleState& s, const ControlInput& u, const VehicleParams& p,
                            const ErrorGP& eg, double dt = kControlPeriod,
                            int substeps = kDefaultSubsteps);

/// Open-loop propagation under recorded inputs; states[0] is x0. Without a
/// model this is the plain E-Kin prediction.
std::vector<VehicleState> rollout(const VehicleState& x0, const std::vector<ControlInput>& inputs,
                                  const VehicleParams& p, const ErrorGP* eg = nullptr);

std::string error_model_to_json(const ErrorGP& eg, const Provenance& prov);
ErrorGP error_model_from_json(const std::string& text);
void save_error_model(const ErrorGP& eg, const std::filesystem::path& path, const Provenance& prov);
ErrorGP load_error_model(const std::filesystem::path& path);

}  // namespace racegp
