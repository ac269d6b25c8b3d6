#include <doctest.h>

#include <cmath>
#include <random>

#include "../common/oracles.hpp"
#include "racegp/config.hpp"
#include "racegp/error_model.hpp"
#include "racegp/errors.hpp"
#include "racegp/experiment.hpp"
#include "support.hpp"

using namespace racegp;

namespace {

std::vector<ErrorSample> synthetic(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<ErrorSample> out(n);
  for (auto& e : out) {
    e.features = {N(rng), 0.05 * N(rng), 2.0 * N(rng), 0.3 * N(rng)};
    e.e_omega = 0.01 * std::tanh(e.features[0]) + 0.002 * e.features[3] + 1e-4 * N(rng);
    e.e_beta = 1e-3 * e.features[1] * e.features[2] + 1e-5 * N(rng);
  }
  return out;
}

}  // namespace

TEST_CASE("standardizer") {
  Eigen::MatrixXd X(4, 2);
  X << 1, 5, 2, 5, 3, 5, 4, 5;
  const auto s = Standardizer::fit(X);
  CHECK(s.shift(0) == doctest::Approx(2.5));
  CHECK(s.scale(0) == doctest::Approx(std::sqrt(1.25)));
  CHECK(s.scale(1) == 1.0);  // constant column
  const Eigen::MatrixXd Z = s.apply(X);
  CHECK(Z.col(0).mean() == doctest::Approx(0.0).scale(1.0));
  CHECK(Z.col(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(s.apply(Eigen::MatrixXd(2, 3)), LengthMismatch);
}

TEST_CASE("error model fit") {
  const auto train = synthetic(150, 1);
  const auto test = synthetic(100, 2);
  ErrorFitOptions o;
  o.budget = 60;
  o.restarts = 2;
  const ErrorGP eg = fit_error_model(train, "rq+lin", SizeFraction::full, o);
  CHECK(eg.combo == "RQ+LIN");
  CHECK(eg.gp_omega.size() == 150);
  CHECK(eg.evaluations <= 120);
  CHECK(eg.train_time_s > 0.0);
  const auto p = predict_errors(eg, feature_matrix(test));
  const Eigen::VectorXd yo = omega_targets(test);
  const double ss_res = (yo - p.mean_omega).squaredNorm();
  const double ss_tot = (yo.array() - yo.mean()).square().sum();
  CHECK(1.0 - ss_res / ss_tot > 0.9);
  CHECK(p.var_omega.minCoeff() >= 0.0);

  SUBCASE("downsampling") {
    const ErrorGP half = fit_error_model(train, "RQ+LIN", SizeFraction::half, o);
    CHECK(half.gp_omega.size() == 75);
    const ErrorGP third = fit_error_model(train, "RQ+LIN", SizeFraction::third, o);
    CHECK(third.gp_omega.size() == 50);
  }
  SUBCASE("deterministic") {
    const ErrorGP again = fit_error_model(train, "RQ+LIN", SizeFraction::full, o);
    const auto q = predict_errors(again, feature_matrix(test));
    CHECK(q.mean_omega == p.mean_omega);
    CHECK(q.var_beta == p.var_beta);
  }
  SUBCASE("unknown combo") {
    CHECK_THROWS_AS(fit_error_model(train, "FOO", SizeFraction::full, o), UnknownCombo);
  }
}

TEST_CASE("zero residuals") {
  auto errs = synthetic(40, 3);
  for (auto& e : errs) e.e_omega = e.e_beta = 0.0;
  ErrorFitOptions o;
  o.budget = 40;
  const ErrorGP eg = fit_error_model(errs, "RBF+LIN", SizeFraction::full, o);
  const auto p = predict_errors(eg, feature_matrix(synthetic(20, 4)));
  CHECK(p.mean_omega.cwiseAbs().maxCoeff() == 0.0);
  CHECK(p.mean_beta.cwiseAbs().maxCoeff() == 0.0);
  CHECK(p.var_omega.maxCoeff() < 1e-3);

  SUBCASE("corrected step is the E-Kin step") {
    VehicleParams vp;
    const VehicleState s{1, 2, 0.05, 4.0, 0.3, 0.4, 0.01};
    const ControlInput u{0.5, -0.2};
    const VehicleState a = corrected_step(s, u, vp, eg);
    const VehicleState b = integrate_step(ModelKind::ekin, s, u, vp);
    CHECK(a == b);
  }
}

TEST_CASE("fixed-hyperparameter model against dense oracles") {
  const auto errs = synthetic(10, 5);
  const Eigen::MatrixXd X = feature_matrix(errs);
  const Standardizer norm = Standardizer::fit(X);
  const Eigen::MatrixXd Xn = norm.apply(X);
  const Eigen::VectorXd yo = omega_targets(errs), yb = beta_targets(errs);
  const double mo = yo.mean(), so = std::sqrt((yo.array() - mo).square().mean());
  const double mb = yb.mean(), sb = std::sqrt((yb.array() - mb).square().mean());
  const Eigen::VectorXd yno = (yo.array() - mo) / so, ynb = (yb.array() - mb) / sb;

  std::mt19937_64 rng(6);
  const auto ko = oracle::random_combo(rng);
  const auto kb = oracle::random_combo(rng);
  const ErrorGP eg = assemble_error_model("custom", norm, {mo, so, mb, sb}, Xn, yno, ynb, ko, 0.05, kb, 0.02);

  const auto test = synthetic(7, 7);
  const Eigen::MatrixXd Xs = feature_matrix(test);
  const auto p = predict_errors(eg, Xs);
  const auto oo = oracle::dense_gp(ko, Xn, yno, 0.05, norm.apply(Xs));
  const auto ob = oracle::dense_gp(kb, Xn, ynb, 0.02, norm.apply(Xs));
  for (int i = 0; i < 7; ++i) {
    CHECK(p.mean_omega(i) == doctest::Approx(oo.mean(i) * so + mo).epsilon(1e-9));
    CHECK(p.var_omega(i) == doctest::Approx(oo.var(i) * so * so).epsilon(1e-9));
    CHECK(p.mean_beta(i) == doctest::Approx(ob.mean(i) * sb + mb).epsilon(1e-9));
    CHECK(p.var_beta(i) == doctest::Approx(ob.var(i) * sb * sb).epsilon(1e-9));
  }
}

TEST_CASE("corrected step on simulated data") {
  // shipped track and settings; the model is fitted on lap 1 and judged on lap 2
  const RunConfig cfg = load_run_config(std::string(RACEGP_SOURCE_DIR) + "/config/default.yaml");
  DatasetCache cache(cfg);
  const auto& e = cache.get("circuit_a", Scenario{}, 0);
  const VehicleParams& p = cfg.vehicle;
  ErrorFitOptions o;
  o.budget = 30;
  o.restarts = 2;
  const ErrorGP eg = fit_error_model(e.train_errors, "RQ+LIN", SizeFraction::third, o);
  int better = 0, total = 0;
  for (const auto& s : e.data.test.samples) {
    const VehicleState c = corrected_step(s.x_k, s.u_k, p, eg);
    const VehicleState k = integrate_step(ModelKind::ekin, s.x_k, s.u_k, p);
    // components 1-5 untouched
    CHECK(c.x == k.x);
    CHECK(c.y == k.y);
    CHECK(c.delta == k.delta);
    CHECK(c.v == k.v);
    CHECK(c.psi == k.psi);
    if (std::abs(k.omega - s.x_next.omega) < 1e-9) continue;  // nothing to correct
    ++total;
    better += std::abs(c.omega - s.x_next.omega) < std::abs(k.omega - s.x_next.omega);
  }
  REQUIRE(total > 1000);
  MESSAGE("improved fraction " << double(better) / total);
  CHECK(double(better) / total >= 0.9);

  SUBCASE("rollout without a model is the E-Kin chain") {
    std::vector<ControlInput> u;
    for (std::size_t i = 0; i < 30; ++i) u.push_back(e.data.test.samples[i].u_k);
    const auto states = rollout(e.data.test.samples[0].x_k, u, p);
    REQUIRE(states.size() == 31);
    VehicleState s = e.data.test.samples[0].x_k;
    for (const auto& ui : u) s = integrate_step(ModelKind::ekin, s, clamp_input(s, ui, p), p);
    CHECK(states.back() == s);
  }
}

TEST_CASE("model files") {
  const auto train = synthetic(60, 8);
  ErrorFitOptions o;
  o.budget = 30;
  const ErrorGP eg = fit_error_model(train, "MAT*RBF", SizeFraction::full, o);
  testing::TempDir dir("model");
  const auto path = dir.path() / "m.json";
  save_error_model(eg, path, {3, "cafe", "0.1.0"});
  const ErrorGP back = load_error_model(path);
  CHECK(back.combo == "MAT*RBF");
  CHECK(back.data_hash == eg.data_hash);
  const auto Xs = feature_matrix(synthetic(10, 9));
  const auto a = predict_errors(eg, Xs);
  const auto b = predict_errors(back, Xs);
  CHECK((a.mean_omega - b.mean_omega).cwiseAbs().maxCoeff() <= 1e-12 * a.mean_omega.cwiseAbs().maxCoeff());
  CHECK((a.var_beta - b.var_beta).cwiseAbs().maxCoeff() <= 1e-12 * a.var_beta.cwiseAbs().maxCoeff());

  SUBCASE("tampered data is rejected") {
    std::string text = error_model_to_json(eg, {});
    const auto pos = text.find("\"y_beta\"");
    REQUIRE(pos != std::string::npos);
    const auto digit = text.find_first_of("123456789", pos);
    text[digit] = text[digit] == '9' ? '8' : static_cast<char>(text[digit] + 1);
    CHECK_THROWS(error_model_from_json(text));
  }
  SUBCASE("wrong format tag") {
    CHECK_THROWS(error_model_from_json("{\"format\": \"other\"}"));
  }
}
