// Independent slow-path oracles used by the unit and acceptance tests. These
// share no solver code with the library: the prox oracle works purely by grid
// evaluation of the objective, the chi-square oracle integrates the density,
// and the lasso oracle is plain proximal-gradient descent.
#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace oracle {

double scad_value(double d, double lambda, double c);

double prox_objective(const Eigen::VectorXd& z, const Eigen::VectorXd& theta,
                      double rho, double lambda, double c);

// Cyclic coordinate descent where each line minimization is a grid search
// over sign(z_k) * [0, |z_k|] with the given step (endpoint included), ties
// resolved toward smaller magnitude. exhaustive scans every grid point; the
// default coarse-to-fine schedule brackets the minimum first, which is exact
// for unimodal slices.
Eigen::VectorXd grid_prox(const Eigen::VectorXd& z, double rho, double lambda,
                          double c, double step = 1e-4, bool exhaustive = false);

// Single 1-D grid minimization of
//   0.5*rho*(z-t)^2 + log(1 + s_other + scad(t))
// over the same candidate grid; used to check solve_1d directly.
double grid_line_min(double z, double s_other, double rho, double lambda,
                     double c, double step, bool exhaustive = true);

// Chi-square distribution via composite Simpson integration of the density
// (dof == 1 is integrated in the u = sqrt(t) substitution, which removes the
// endpoint singularity).
double simpson_chi2_cdf(int dof, double x);
double simpson_chi2_quantile(int dof, double tau);

// Objective value reached by proximal-gradient descent with step 1/L.
double prox_gradient_lasso_objective(const Eigen::MatrixXd& D,
                                     const Eigen::VectorXd& y, double lambda2,
                                     int iters = 200000);

struct ProxInstance {
  Eigen::VectorXd z;
  double rho = 1.0;
  double lambda = 0.5;
  double c = 3.0;
};

// Random prox instance (1 <= dim <= 4, some coordinates exactly zero) whose
// parameters satisfy the strict-convexity condition for c0 = max(1, nnz(z)).
ProxInstance random_convex_instance(std::uint64_t seed);

// Deterministic grayscale test scene: smooth waves, a bright blob, and
// blocky steps, all inside [0, 255].
Eigen::MatrixXd make_test_image(int rows, int cols);

}  // namespace oracle
