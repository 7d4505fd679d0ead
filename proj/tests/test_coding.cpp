#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gscad/coding.hpp"
#include "gscad/synth.hpp"
#include "oracles.hpp"

using namespace gscad;

namespace {

Eigen::MatrixXd random_matrix(int m, int p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd d(m, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < m; ++i) d(i, j) = g(rng);
  return d;
}

}  // namespace

TEST_CASE("soft threshold") {
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-3.0, 1.0) == -2.0);
  CHECK(soft_threshold(0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
  CHECK(soft_threshold(2.0, 0.0) == 2.0);
}

TEST_CASE("lasso single-atom closed form") {
  Eigen::MatrixXd d(2, 1);
  d << 1.0, 0.0;
  Eigen::VectorXd y = 3.0 * d.col(0);
  LassoResult r = lasso_cd(d, y, 1.0);
  CHECK(r.converged);
  CHECK(r.alpha[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("lasso large lambda gives exact zeros") {
  Eigen::MatrixXd d = random_matrix(8, 12, 3);
  Eigen::VectorXd y = random_matrix(8, 1, 4);
  LassoResult r = lasso_cd(d, y, 1e6);
  CHECK(r.converged);
  CHECK(r.alpha.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lasso objective is non-increasing and matches the oracle") {
  Eigen::MatrixXd d = random_matrix(10, 20, 5);
  Eigen::VectorXd y = random_matrix(10, 1, 6);
  LassoResult r = lasso_cd(d, y, 0.1, 1e-9, 2000, nullptr, true);
  CHECK(r.converged);
  REQUIRE(!r.objective_history.empty());
  for (size_t i = 1; i < r.objective_history.size(); ++i)
    CHECK(r.objective_history[i] <= r.objective_history[i - 1] + 1e-12);
  double obj = r.objective_history.back();
  double oracle_obj = oracle::prox_gradient_lasso_objective(d, y, 0.1, 100000);
  CHECK(std::abs(obj - oracle_obj) <= 1e-6 * std::max(1.0, std::abs(oracle_obj)));
}

TEST_CASE("lasso satisfies its KKT conditions on random instances") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> um(5, 25), up(5, 35);
  std::uniform_real_distribution<double> ul(0.01, 1.0);
  for (int i = 0; i < 30; ++i) {
    int m = um(rng), p = up(rng);
    Eigen::MatrixXd d = random_matrix(m, p, 100 + i);
    Eigen::VectorXd y = random_matrix(m, 1, 200 + i);
    double lambda2 = ul(rng);
    LassoResult r = lasso_cd(d, y, lambda2, 1e-7);
    CHECK(r.converged);
    CHECK(r.kkt_violation <= 1e-7);
    // recompute the violation independently
    Eigen::VectorXd res = y - d * r.alpha;
    double viol = 0.0;
    for (int j = 0; j < p; ++j) {
      double gj = d.col(j).dot(res);
      double vj = (r.alpha[j] == 0.0)
                      ? std::max(0.0, std::abs(gj) - lambda2)
                      : std::abs(gj - lambda2 * (r.alpha[j] > 0 ? 1.0 : -1.0));
      viol = std::max(viol, vj);
    }
    CHECK(viol <= 1e-6);
  }
}

TEST_CASE("lasso with lambda2 = 0 solves the full-rank system") {
  Eigen::MatrixXd d = random_matrix(8, 8, 9);
  d += 4.0 * Eigen::MatrixXd::Identity(8, 8);  // keep it well conditioned
  LassoBatchResult batch = lasso_batch(d, d, 0.0, 1e-12, 20000);
  CHECK(batch.nonconverged_columns.empty());
  CHECK((d * batch.codes.data - d).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("lasso warm start reaches the same solution") {
  Eigen::MatrixXd d = random_matrix(12, 18, 21);
  Eigen::VectorXd y = random_matrix(12, 1, 22);
  LassoResult cold = lasso_cd(d, y, 0.2, 1e-9, 5000);
  Eigen::VectorXd w = cold.alpha;
  for (Eigen::Index j = 0; j < w.size(); ++j) w[j] *= 1.05;  // perturbed warm start
  LassoResult warm = lasso_cd(d, y, 0.2, 1e-9, 5000, &w);
  CHECK(warm.converged);
  CHECK((warm.alpha - cold.alpha).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("lasso_batch matches per-column solves and is thread invariant") {
  Eigen::MatrixXd d = random_matrix(10, 14, 31);
  Eigen::MatrixXd y = random_matrix(10, 7, 32);
  LassoBatchResult one = lasso_batch(d, y, 0.15, 1e-8, 2000, nullptr, 1);
  LassoBatchResult four = lasso_batch(d, y, 0.15, 1e-8, 2000, nullptr, 4);
  CHECK((one.codes.data - four.codes.data).cwiseAbs().maxCoeff() == 0.0);
  for (int j = 0; j < 7; ++j) {
    LassoResult r = lasso_cd(d, y.col(j), 0.15, 1e-8, 2000);
    CHECK((one.codes.data.col(j) - r.alpha).cwiseAbs().maxCoeff() == 0.0);
    int nnz = 0;
    for (Eigen::Index i = 0; i < r.alpha.size(); ++i) nnz += (r.alpha[i] != 0.0);
    CHECK(one.codes.nnz_per_column[static_cast<size_t>(j)] == nnz);
  }
}

TEST_CASE("lasso rejects invalid inputs") {
  Eigen::MatrixXd d = random_matrix(4, 4, 1);
  Eigen::VectorXd y = random_matrix(4, 1, 2);
  CHECK_THROWS_AS(lasso_cd(d, y, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(lasso_cd(d, random_matrix(5, 1, 3), 0.1), std::invalid_argument);
  CHECK_THROWS_AS(lasso_cd(Eigen::MatrixXd(), y, 0.1), std::invalid_argument);
}

TEST_CASE("omp recovers a single atom exactly") {
  Eigen::MatrixXd d = random_matrix(12, 20, 41);
  Eigen::VectorXd y = 2.5 * d.col(7);
  OmpResult r = omp_fixed(d, y, 1);
  REQUIRE(r.support.size() == 1);
  CHECK(r.support[0] == 7);
  CHECK(r.alpha[7] == doctest::Approx(2.5).epsilon(1e-10));
  CHECK(r.residual_norm_sq <= 1e-16 * y.squaredNorm());
}

TEST_CASE("omp exact coefficients on an orthonormal dictionary") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Identity(6, 6);
  Eigen::VectorXd y = 2.0 * d.col(0) + d.col(1);
  OmpResult r = omp_fixed(d, y, 2);
  CHECK(r.alpha[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r.alpha[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.residual_norm_sq <= 1e-20);
}

TEST_CASE("omp support recovery on noiseless bar signals") {
  Dictionary d0 = generate_d0();
  SynthConfig cfg;
  cfg.sigma = 0.0;
  cfg.sparsity = 3;
  SignalBatchResult sig = generate_signals(d0, 100, cfg, 424242);
  int recovered = 0;
  for (int i = 0; i < 100; ++i) {
    OmpResult r = omp_fixed(d0.atoms, sig.noisy.col(i), 3);
    std::vector<int> got = r.support, want = sig.supports[static_cast<size_t>(i)];
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    if (got == want &&
        (d0.atoms * r.alpha - sig.clean.col(i)).norm() <= 1e-8)
      ++recovered;
  }
  CHECK(recovered >= 99);
}

TEST_CASE("omp with k = p reproduces the least-squares solution") {
  Eigen::MatrixXd d = random_matrix(10, 6, 51);
  Eigen::VectorXd y = random_matrix(10, 1, 52);
  OmpResult r = omp_fixed(d, y, 6);
  Eigen::VectorXd ls = d.colPivHouseholderQr().solve(y);
  CHECK((r.alpha - ls).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("omp on a signal orthogonal to every atom") {
  Eigen::MatrixXd d(4, 2);
  d << 1, 0, 0, 1, 0, 0, 0, 0;
  Eigen::VectorXd y(4);
  y << 0, 0, 1, 0;
  OmpResult r = omp_fixed(d, y, 1);
  REQUIRE(r.support.size() == 1);
  CHECK(r.alpha[r.support[0]] == 0.0);
  CHECK(r.residual_norm_sq == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("omp residual history is monotone") {
  for (int i = 0; i < 20; ++i) {
    Eigen::MatrixXd d = random_matrix(15, 30, 600 + i);
    Eigen::VectorXd y = random_matrix(15, 1, 700 + i);
    OmpResult r = omp_fixed(d, y, 10);
    double prev = y.squaredNorm();
    for (double h : r.residual_history) {
      CHECK(h <= prev + 1e-10);
      prev = h;
    }
  }
}

TEST_CASE("omp_error stops at the budget") {
  Eigen::MatrixXd d = random_matrix(12, 24, 81);
  Eigen::VectorXd y = random_matrix(12, 1, 82);
  double target = 0.25 * y.squaredNorm();
  OmpResult r = omp_error(d, y, target);
  CHECK(r.residual_norm_sq <= target);
  CHECK_FALSE(r.budget_unreachable);
  // a budget above the signal energy needs no atoms at all
  OmpResult lazy = omp_error(d, y, 2.0 * y.squaredNorm());
  CHECK(lazy.support.empty());
  CHECK_FALSE(lazy.budget_unreachable);
}

TEST_CASE("omp_error flags an unreachable budget") {
  Eigen::MatrixXd d(3, 1);
  d << 1, 0, 0;
  Eigen::VectorXd y(3);
  y << 1, 2, 0;
  OmpResult r = omp_error(d, y, 1e-12);
  CHECK(r.budget_unreachable);
  CHECK(r.residual_norm_sq == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("omp flags rank deficiency") {
  Eigen::MatrixXd d(4, 3);
  d.col(0) << 1, 0, 0, 0;
  d.col(1) << 1, 1e-14, 0, 0;  // numerically dependent on column 0
  d.col(2) << 0, 1, 0, 0;
  Eigen::VectorXd y(4);
  y << 3, 0, 0, 0;
  OmpResult r = omp_fixed(d, y, 3);
  CHECK(r.rank_deficient);
  CHECK(r.support.size() < 3);
}

TEST_CASE("omp rejects invalid inputs") {
  Eigen::MatrixXd d = random_matrix(4, 4, 1);
  Eigen::VectorXd y = random_matrix(4, 1, 2);
  CHECK_THROWS_AS(omp_fixed(d, y, 0), std::invalid_argument);
  CHECK_THROWS_AS(omp_fixed(d, y, 5), std::invalid_argument);
  CHECK_THROWS_AS(omp_error(d, y, -1.0), std::invalid_argument);
}

TEST_CASE("chi-square quantiles match frozen values and the oracle") {
  CHECK(chi2_quantile(64, 0.9) == doctest::Approx(78.8596424991).epsilon(1e-8));
  CHECK(chi2_quantile(1, 0.9) == doctest::Approx(2.7055434541).epsilon(1e-8));
  CHECK(chi2_quantile(2, 1.0 - std::exp(-1.0)) == doctest::Approx(2.0).epsilon(1e-10));
  for (int dof : {1, 2, 64})
    for (double tau : {0.5, 0.9, 0.99}) {
      double q = chi2_quantile(dof, tau);
      double qo = oracle::simpson_chi2_quantile(dof, tau);
      CHECK(std::abs(q - qo) <= 1e-3 * qo);
      CHECK(std::abs(chi2_cdf(dof, q) - tau) <= 1e-6);
    }
  CHECK(chi2_cdf(2, 2.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
  CHECK(chi2_cdf(5, 0.0) == 0.0);
  CHECK_THROWS_AS(chi2_quantile(0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(chi2_quantile(2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(chi2_quantile(2, 0.0), std::invalid_argument);
}

TEST_CASE("error budget derivation") {
  double eps = derive_epsilon0(10.0, 0.9, 8);
  CHECK(eps == doctest::Approx(100.0 * chi2_quantile(64, 0.9)).epsilon(1e-12));
  CHECK(derive_epsilon0(0.0, 0.9, 8) > 0.0);
  DenoiseConfig cfg = make_denoise_config(10.0, 0.9, 8, 5000);
  CHECK(cfg.epsilon0 == doctest::Approx(eps).epsilon(1e-15));
  CHECK(cfg.train_subsample == 5000);
  CHECK_THROWS_AS(derive_epsilon0(-1.0, 0.9, 8), std::invalid_argument);
}
