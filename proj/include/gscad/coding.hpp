// Sparse coders: coordinate-descent lasso, orthogonal matching pursuit, and
// the chi-square quantile used to size OMP error budgets.
#pragma once

#include <Eigen/Dense>
#include <vector>

namespace gscad {

// Soft threshold S(x, t) = sign(x) * max(|x| - t, 0); exact zero inside the
// dead zone.
inline double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

struct LassoResult {
  Eigen::VectorXd alpha;
  bool converged = false;
  int sweeps = 0;
  double kkt_violation = 0.0;  // sup-norm KKT residual at exit
  std::vector<double> objective_history;  // filled when record_objective
};

// Coordinate descent on 0.5*||y - D*alpha||^2 + lambda2*||alpha||_1 with
// residual updates and an active-set schedule: full sweeps alternate with
// sweeps over the current nonzero set until the KKT residual over all
// coordinates drops below tol. warm_start, when given, seeds alpha.
LassoResult lasso_cd(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                     double lambda2, double tol = 1e-7, int max_iter = 10000,
                     const Eigen::VectorXd* warm_start = nullptr,
                     bool record_objective = false);

struct CodeMatrix {
  Eigen::MatrixXd data;  // p x n, column j codes signal j
  std::vector<int> nnz_per_column;
};

struct LassoBatchResult {
  CodeMatrix codes;
  std::vector<int> nonconverged_columns;
};

// Codes every column of Y against D. warm_start, when given, must be p x n.
LassoBatchResult lasso_batch(const Eigen::MatrixXd& D, const Eigen::MatrixXd& Y,
                             double lambda2, double tol = 1e-7,
                             int max_iter = 10000,
                             const Eigen::MatrixXd* warm_start = nullptr,
                             int threads = 1);

struct OmpResult {
  Eigen::VectorXd alpha;
  std::vector<int> support;  // selection order
  double residual_norm_sq = 0.0;
  std::vector<double> residual_history;  // squared norm after each refit
  bool rank_deficient = false;
  bool budget_unreachable = false;
};

// OMP with atom selection on unit-l2-normalized columns and least-squares
// refit on the original columns. Ties in |correlation| go to the lowest
// index. A rank-deficient refit drops the offending atom and stops.
OmpResult omp_fixed(const Eigen::MatrixXd& D, const Eigen::VectorXd& y, int k);

// Error-constrained OMP: stops once ||r||^2 <= epsilon0, or flags
// budget_unreachable when the support saturates first.
OmpResult omp_error(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                    double epsilon0);

// Regularized lower incomplete gamma P(a, x) (series / continued fraction).
double regularized_gamma_p(double a, double x);

// Chi-square CDF and quantile (bisection on the CDF), dof >= 1.
double chi2_cdf(int dof, double x);
double chi2_quantile(int dof, double tau);

// Patch-denoising knobs shared between the coder and the image pipeline.
struct DenoiseConfig {
  double sigma = 10.0;
  double tau = 0.9;
  int patch_size = 8;
  double epsilon0 = 0.0;   // <= 0 means derive from (sigma, tau, patch_size)
  int train_subsample = 0; // 0 trains on every patch
};

// sigma^2 * F_m^{-1}(tau) with m = patch_size^2; a small positive floor when
// sigma == 0 so noiseless inputs code near-losslessly.
double derive_epsilon0(double sigma, double tau, int patch_size);

// Config with epsilon0 filled in from the other fields.
DenoiseConfig make_denoise_config(double sigma, double tau = 0.9,
                                  int patch_size = 8, int train_subsample = 0);

}  // namespace gscad
