// SCAD penalty, its grouped log-composite (GSCAD), and the proximal column
// solver used by the ADMM dictionary update.
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace gscad {

// Shared penalty / solver parameters. lambda1 weights the dictionary penalty,
// lambda2 the coding l1 penalty, rho is the quadratic coupling weight.
struct PenaltyParams {
  double lambda1 = 0.05;
  double c = 3.0;
  double rho = 1.0;
  double lambda2 = 0.1;
  void validate() const;  // throws std::invalid_argument
};

// SCAD penalty value: linear up to lambda, quadratic blend up to c*lambda,
// constant (c+1)*lambda^2/2 beyond. Requires c > 2, lambda >= 0.
double scad(double d, double lambda, double c);

// First derivative w.r.t. |d| times sign(d); zero beyond c*lambda.
double scad_dot(double d, double lambda, double c);

// Second derivative: -1/(c-1) on the middle segment, 0 elsewhere.
double scad_ddot(double d, double lambda, double c);

// Grouped penalty log{1 + sum_k scad(theta_k)}.
double gscad(const Eigen::VectorXd& theta, double lambda, double c);

// Sufficient condition for strict convexity of the prox objective when at
// most c0 coordinates of z are nonzero:
//   lambda^2 <= rho/c0  and  (c-1)*{rho*(1+lambda^2)^2 - c0*lambda^2} >= 1+lambda^2.
bool convexity_condition(double rho, double lambda, double c, int c0);

// Prox objective (rho/2)*||z-theta||^2 + gscad(theta).
double prox_objective(const Eigen::VectorXd& z, const Eigen::VectorXd& theta,
                      double rho, double lambda, double c);

// Exact minimizer of the one-dimensional restriction
//   g(t) = (rho/2)*(z-t)^2 + log(1 + s_other + scad(t, lambda, c))
// over t in [0, z] (mirrored for z < 0). s_other >= 0 is the penalty mass of
// the other coordinates. Candidates are the closed-form stationary points of
// each SCAD segment plus segment knots and endpoints; ties resolve to the
// smaller |t| so exact zeros survive.
double solve_1d(double z, double s_other, double rho, double lambda, double c);

struct ProxResult {
  Eigen::VectorXd theta_hat;
  double objective_value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Cyclic coordinate descent on the prox objective, initialized at theta = z,
// stopping on sup-norm change < tol. lambda == 0 returns z directly.
// Guaranteed: sign(theta_hat_k) == sign(z_k) or 0, |theta_hat_k| <= |z_k|,
// and objective <= min(L(z), L(0)).
ProxResult prox_column(const Eigen::VectorXd& z, double rho, double lambda,
                       double c, double tol = 1e-8, int max_iter = 200);

struct PartitionCell {
  double z1 = 0.0;
  double z2 = 0.0;
  int nonzeros = 0;
};

// Evaluates prox_column on the 2-D grid z in [-z_range, z_range]^2 with the
// given step and records the sparsity pattern of each minimizer.
std::vector<PartitionCell> partition_grid(double z_range, double step,
                                          double rho, double lambda, double c);

// CSV with header "z1,z2,nonzeros".
std::string partition_to_csv(const std::vector<PartitionCell>& cells);

}  // namespace gscad
