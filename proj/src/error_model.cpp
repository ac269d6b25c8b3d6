#include "racegp/error_model.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>

#include "racegp/csv.hpp"
#include "racegp/errors.hpp"

namespace racegp {

using nlohmann::json;

namespace {

constexpr int kModelFormatVersion = 1;
constexpr double kMinSpread = 1e-12;

std::pair<double, double> scalar_scaling(const Eigen::VectorXd& y) {
  const double mean = y.mean();
  const double var = (y.array() - mean).square().mean();
  const double sd = std::sqrt(var);
  return {mean, sd > kMinSpread ? sd : 1.0};
}

json kernel_to_json(const KernelExpr& k) {
  switch (k.op()) {
    case KernelExpr::Op::sum:
      return {{"op", "sum"}, {"left", kernel_to_json(k.left())}, {"right", kernel_to_json(k.right())}};
    case KernelExpr::Op::product:
      return {{"op", "product"},
              {"left", kernel_to_json(k.left())},
              {"right", kernel_to_json(k.right())}};
    case KernelExpr::Op::leaf:
      break;
  }
  const Hyperparams& h = k.hyper();
  return {{"op", "leaf"},
          {"kind", std::string(to_string(k.kind()))},
          {"active_dims", k.active_dims()},
          {"sigma2", h.sigma2},
          {"l", h.l},
          {"alpha", h.alpha},
          {"p", h.p},
          {"sigma_b2", h.sigma_b2},
          {"sigma_v2", h.sigma_v2},
          {"c", h.c},
          {"nu", h.nu}};
}

KernelExpr kernel_from_json(const json& j) {
  const std::string op = j.at("op").get<std::string>();
  if (op == "sum") return KernelExpr::sum(kernel_from_json(j.at("left")), kernel_from_json(j.at("right")));
  if (op == "product") {
    return KernelExpr::product(kernel_from_json(j.at("left")), kernel_from_json(j.at("right")));
  }
  if (op != "leaf") throw Error("unknown kernel node '" + op + "'");
  Hyperparams h;
  h.sigma2 = j.at("sigma2").get<double>();
  h.l = j.at("l").get<double>();
  h.alpha = j.at("alpha").get<double>();
  h.p = j.at("p").get<double>();
  h.sigma_b2 = j.at("sigma_b2").get<double>();
  h.sigma_v2 = j.at("sigma_v2").get<double>();
  h.c = j.at("c").get<double>();
  h.nu = j.at("nu").get<double>();
  return KernelExpr::leaf(kernel_kind_from_string(j.at("kind").get<std::string>()), h,
                          j.at("active_dims").get<std::vector<int>>());
}

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    std::vector<double> r(M.cols());
    for (Eigen::Index j = 0; j < M.cols(); ++j) r[j] = M(i, j);
    rows.push_back(std::move(r));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index cols) {
  Eigen::MatrixXd M(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto r = j[i].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(r.size()) != cols) throw Error("model file: ragged feature row");
    for (Eigen::Index c = 0; c < cols; ++c) M(static_cast<Eigen::Index>(i), c) = r[c];
  }
  return M;
}

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string hash_training_set(const Eigen::MatrixXd& Xn, const Eigen::VectorXd& yo,
                              const Eigen::VectorXd& yb) {
  std::uint64_t h = fnv1a(std::span<const double>(Xn.data(), static_cast<std::size_t>(Xn.size())));
  h = fnv1a(std::span<const double>(yo.data(), static_cast<std::size_t>(yo.size())), h);
  h = fnv1a(std::span<const double>(yb.data(), static_cast<std::size_t>(yb.size())), h);
  return hex64(h);
}

}  // namespace

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
  Standardizer s;
  s.shift = X.colwise().mean().transpose();
  s.scale.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double sd = std::sqrt((X.col(j).array() - s.shift(j)).square().mean());
    s.scale(j) = sd > kMinSpread ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
  if (X.cols() != shift.size()) throw LengthMismatch("feature width differs from the normalizer");
  return (X.rowwise() - shift.transpose()).array().rowwise() / scale.transpose().array();
}

Eigen::MatrixXd feature_matrix(const std::vector<ErrorSample>& errs) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(errs.size()), kFeatureCount);
  for (std::size_t i = 0; i < errs.size(); ++i) {
    for (int j = 0; j < kFeatureCount; ++j) X(static_cast<Eigen::Index>(i), j) = errs[i].features[j];
  }
  return X;
}

Eigen::VectorXd omega_targets(const std::vector<ErrorSample>& errs) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(errs.size()));
  for (std::size_t i = 0; i < errs.size(); ++i) y(static_cast<Eigen::Index>(i)) = errs[i].e_omega;
  return y;
}

Eigen::VectorXd beta_targets(const std::vector<ErrorSample>& errs) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(errs.size()));
  for (std::size_t i = 0; i < errs.size(); ++i) y(static_cast<Eigen::Index>(i)) = errs[i].e_beta;
  return y;
}

ErrorGP assemble_error_model(const std::string& combo, Standardizer features,
                             std::array<double, 4> target_scaling, Eigen::MatrixXd Xn,
                             Eigen::VectorXd yn_omega, Eigen::VectorXd yn_beta,
                             const KernelExpr& k_omega, double noise_omega,
                             const KernelExpr& k_beta, double noise_beta) {
  ErrorGP eg;
  eg.combo = combo;
  eg.features = std::move(features);
  eg.omega_shift = target_scaling[0];
  eg.omega_scale = target_scaling[1];
  eg.beta_shift = target_scaling[2];
  eg.beta_scale = target_scaling[3];
  eg.data_hash = hash_training_set(Xn, yn_omega, yn_beta);
  eg.gp_omega = gp_fit(Xn, std::move(yn_omega), k_omega, noise_omega);
  eg.gp_beta = gp_fit(std::move(Xn), std::move(yn_beta), k_beta, noise_beta);
  return eg;
}

ErrorGP fit_error_model(const std::vector<ErrorSample>& errs, const std::string& combo,
                        SizeFraction fraction, const ErrorFitOptions& options) {
  const auto sub = downsample(errs, fraction);
  if (sub.empty()) throw Error("fit_error_model: no samples after downsampling");
  const std::string name = canonical_combo(combo);
  const KernelExpr k0 = build_kernel_combo(name);

  const auto start = std::chrono::steady_clock::now();
  const Eigen::MatrixXd X = feature_matrix(sub);
  Standardizer norm = Standardizer::fit(X);
  Eigen::MatrixXd Xn = norm.apply(X);
  const Eigen::VectorXd yo = omega_targets(sub);
  const Eigen::VectorXd yb = beta_targets(sub);
  const auto [mo, so] = scalar_scaling(yo);
  const auto [mb, sb] = scalar_scaling(yb);
  Eigen::VectorXd yno = (yo.array() - mo) / so;
  Eigen::VectorXd ynb = (yb.array() - mb) / sb;

  OptimizerOptions opt;
  opt.budget = options.budget;
  opt.restarts = options.restarts;
  opt.noise_floor = options.noise_floor;
  opt.seed = options.seed;
  const auto ro = optimize_hyperparams(Xn, yno, k0, options.initial_noise2, opt);
  opt.seed = options.seed ^ 0x9e3779b97f4a7c15ULL;
  const auto rb = optimize_hyperparams(Xn, ynb, k0, options.initial_noise2, opt);

  ErrorGP eg = assemble_error_model(name, std::move(norm), {mo, so, mb, sb}, std::move(Xn),
                                    std::move(yno), std::move(ynb), ro.kernel, ro.noise2,
                                    rb.kernel, rb.noise2);
  eg.evaluations = ro.evaluations + rb.evaluations;
  eg.train_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return eg;
}

ErrorPrediction predict_errors(const ErrorGP& eg, const Eigen::MatrixXd& features) {
  const Eigen::MatrixXd Xs = eg.features.apply(features);
  const Prediction po = gp_predict(eg.gp_omega, Xs);
  const Prediction pb = gp_predict(eg.gp_beta, Xs);
  ErrorPrediction out;
  out.mean_omega = po.mean.array() * eg.omega_scale + eg.omega_shift;
  out.var_omega = po.var * (eg.omega_scale * eg.omega_scale);
  out.mean_beta = pb.mean.array() * eg.beta_scale + eg.beta_shift;
  out.var_beta = pb.var * (eg.beta_scale * eg.beta_scale);
  out.clipped = po.clipped + pb.clipped;
  return out;
}

VehicleState corrected_step(const VehicleState& s, const ControlInput& u, const VehicleParams& p,
                            const ErrorGP& eg, double dt, int substeps) {
  const ControlInput uc = clamp_input(s, u, p);
  VehicleState next = integrate_step(ModelKind::ekin, s, uc, p, dt, substeps);
  Eigen::MatrixXd f(1, kFeatureCount);
  f << s.omega, s.beta, uc.a_long, uc.delta_v;
  const ErrorPrediction e = predict_errors(eg, f);
  next.omega += e.mean_omega(0);
  next.beta += e.mean_beta(0);
  return next;
}

std::vector<VehicleState> rollout(const VehicleState& x0, const std::vector<ControlInput>& inputs,
                                  const VehicleParams& p, const ErrorGP* eg) {
  std::vector<VehicleState> states{x0};
  states.reserve(inputs.size() + 1);
  for (const auto& u : inputs) {
    const VehicleState& s = states.back();
    states.push_back(eg ? corrected_step(s, u, p, *eg)
                        : integrate_step(ModelKind::ekin, s, clamp_input(s, u, p), p));
  }
  return states;
}

std::string error_model_to_json(const ErrorGP& eg, const Provenance& prov) {
  const auto gp_json = [](const GPModel& m) {
    return json{{"kernel", kernel_to_json(m.kernel)},
                {"noise2", m.noise2},
                {"jitter", m.jitter},
                {"lml", log_marginal_likelihood(m)}};
  };
  json j;
  j["format"] = "racegp-error-model";
  j["format_version"] = kModelFormatVersion;
  j["tool_version"] = prov.tool_version;
  j["seed"] = prov.seed;
  j["config_hash"] = prov.config_hash;
  j["combo"] = eg.combo;
  j["train_time_s"] = eg.train_time_s;
  j["evaluations"] = eg.evaluations;
  j["data_hash"] = eg.data_hash;
  j["feature_shift"] = vector_to_json(eg.features.shift);
  j["feature_scale"] = vector_to_json(eg.features.scale);
  j["target_scaling"] = {eg.omega_shift, eg.omega_scale, eg.beta_shift, eg.beta_scale};
  j["omega"] = gp_json(eg.gp_omega);
  j["beta"] = gp_json(eg.gp_beta);
  j["X"] = matrix_to_json(eg.gp_omega.X);
  j["y_omega"] = vector_to_json(eg.gp_omega.y);
  j["y_beta"] = vector_to_json(eg.gp_beta.y);
  return j.dump(1) + "\n";
}

ErrorGP error_model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "racegp-error-model") throw Error("not a racegp model file");
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw Error("unsupported model format version");
    }
    Standardizer norm{vector_from_json(j.at("feature_shift")), vector_from_json(j.at("feature_scale"))};
    const auto ts = j.at("target_scaling").get<std::array<double, 4>>();
    Eigen::MatrixXd X = matrix_from_json(j.at("X"), norm.shift.size());
    ErrorGP eg = assemble_error_model(
        j.at("combo").get<std::string>(), std::move(norm), ts, std::move(X),
        vector_from_json(j.at("y_omega")), vector_from_json(j.at("y_beta")),
        kernel_from_json(j.at("omega").at("kernel")), j.at("omega").at("noise2").get<double>(),
        kernel_from_json(j.at("beta").at("kernel")), j.at("beta").at("noise2").get<double>());
    eg.train_time_s = j.at("train_time_s").get<double>();
    eg.evaluations = j.at("evaluations").get<int>();
    if (eg.data_hash != j.at("data_hash").get<std::string>()) {
      throw Error("model file: training data hash mismatch");
    }
    return eg;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed model file: ") + e.what());
  }
}

void save_error_model(const ErrorGP& eg, const std::filesystem::path& path, const Provenance& prov) {
  write_text_file(path, error_model_to_json(eg, prov));
}

ErrorGP load_error_model(const std::filesystem::path& path) {
  return error_model_from_json(read_text_file(path));
}

}  // namespace racegp
