#include "gscad/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gscad/util.hpp"

namespace gscad {

void PenaltyParams::validate() const {
  if (!(lambda1 >= 0.0) || !std::isfinite(lambda1))
    throw std::invalid_argument("lambda1 must be >= 0");
  if (!(c > 2.0) || !std::isfinite(c))
    throw std::invalid_argument("c must be > 2");
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw std::invalid_argument("rho must be > 0");
  if (!(lambda2 >= 0.0) || !std::isfinite(lambda2))
    throw std::invalid_argument("lambda2 must be >= 0");
}

static void check_scad_params(double lambda, double c) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("scad: lambda must be >= 0");
  if (!(c > 2.0) || !std::isfinite(c))
    throw std::invalid_argument("scad: c must be > 2");
}

double scad(double d, double lambda, double c) {
  check_scad_params(lambda, c);
  double a = std::abs(d);
  if (a <= lambda) return lambda * a;
  if (a <= c * lambda)
    return -(a * a - 2.0 * c * lambda * a + lambda * lambda) / (2.0 * (c - 1.0));
  return (c + 1.0) * lambda * lambda / 2.0;
}

double scad_dot(double d, double lambda, double c) {
  check_scad_params(lambda, c);
  double a = std::abs(d);
  double s = (d > 0.0) ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
  if (a <= lambda) return lambda * (s == 0.0 ? 1.0 : s);  // right derivative at 0
  if (a <= c * lambda) return s * (c * lambda - a) / (c - 1.0);
  return 0.0;
}

double scad_ddot(double d, double lambda, double c) {
  check_scad_params(lambda, c);
  double a = std::abs(d);
  if (a > lambda && a <= c * lambda) return -1.0 / (c - 1.0);
  return 0.0;
}

double gscad(const Eigen::VectorXd& theta, double lambda, double c) {
  check_scad_params(lambda, c);
  double total = 0.0;
  for (Eigen::Index k = 0; k < theta.size(); ++k) total += scad(theta[k], lambda, c);
  return std::log1p(total);
}

bool convexity_condition(double rho, double lambda, double c, int c0) {
  if (!(rho > 0.0) || !(lambda >= 0.0) || !(c > 2.0) || c0 < 1)
    throw std::invalid_argument("convexity_condition: bad parameters");
  double l2 = lambda * lambda;
  if (l2 > rho / c0) return false;
  double lhs = (c - 1.0) * (rho * (1.0 + l2) * (1.0 + l2) - c0 * l2);
  return lhs >= 1.0 + l2;
}

double prox_objective(const Eigen::VectorXd& z, const Eigen::VectorXd& theta,
                      double rho, double lambda, double c) {
  if (z.size() != theta.size())
    throw std::invalid_argument("prox_objective: size mismatch");
  return 0.5 * rho * (z - theta).squaredNorm() + gscad(theta, lambda, c);
}

// Real roots of x^3 + a x^2 + b x + c, Numerical-Recipes style, with a Newton
// polish per root.
static int solve_cubic_real(double a, double b, double c, double out[3]) {
  double Q = (a * a - 3.0 * b) / 9.0;
  double R = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
  int n = 0;
  if (R * R < Q * Q * Q) {
    double th = std::acos(std::clamp(R / std::sqrt(Q * Q * Q), -1.0, 1.0));
    double m = -2.0 * std::sqrt(Q);
    out[n++] = m * std::cos(th / 3.0) - a / 3.0;
    out[n++] = m * std::cos((th + 2.0 * M_PI) / 3.0) - a / 3.0;
    out[n++] = m * std::cos((th - 2.0 * M_PI) / 3.0) - a / 3.0;
  } else {
    double A = -std::copysign(std::cbrt(std::abs(R) + std::sqrt(std::max(0.0, R * R - Q * Q * Q))), R);
    double B = (A != 0.0) ? Q / A : 0.0;
    out[n++] = A + B - a / 3.0;
  }
  for (int i = 0; i < n; ++i) {
    for (int it = 0; it < 2; ++it) {
      double x = out[i];
      double f = ((x + a) * x + b) * x + c;
      double fp = (3.0 * x + 2.0 * a) * x + b;
      if (fp != 0.0 && std::isfinite(f) && std::isfinite(fp)) out[i] = x - f / fp;
    }
  }
  return n;
}

double solve_1d(double z, double s_other, double rho, double lambda, double c) {
  check_scad_params(lambda, c);
  if (!(rho > 0.0)) throw std::invalid_argument("solve_1d: rho must be > 0");
  if (!(s_other >= 0.0)) s_other = 0.0;
  if (z == 0.0) return 0.0;
  if (lambda == 0.0) return z;

  double sgn = (z > 0.0) ? 1.0 : -1.0;
  double a = std::abs(z);
  double S = 1.0 + s_other;

  auto g = [&](double t) {
    return 0.5 * rho * (a - t) * (a - t) + std::log(S + scad(t, lambda, c));
  };

  std::vector<double> cand{0.0, a};
  if (lambda < a) cand.push_back(lambda);
  if (c * lambda < a) cand.push_back(c * lambda);

  // Segment [0, min(lambda, a)]: stationarity gives
  //   rho*lambda*t^2 + rho*(S - a*lambda)*t + (lambda - rho*a*S) = 0.
  {
    double hi = std::min(lambda, a);
    double qa = rho * lambda;
    double qb = rho * (S - a * lambda);
    double qc = lambda - rho * a * S;
    double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0 && qa > 0.0) {
      double sq = std::sqrt(disc);
      double q = -0.5 * (qb + std::copysign(sq, qb));
      double r1 = (qa != 0.0) ? q / qa : std::numeric_limits<double>::quiet_NaN();
      double r2 = (q != 0.0) ? qc / q : std::numeric_limits<double>::quiet_NaN();
      for (double r : {r1, r2})
        if (std::isfinite(r) && r > 0.0 && r < hi) cand.push_back(r);
    }
  }

  // Segment (lambda, min(c*lambda, a)): stationarity gives the cubic
  //   rho*t^3 - rho*(a+B)*t^2 + (rho*(a*B - C) + 2)*t + (rho*a*C - 2*c*lambda) = 0
  // with B = 2*c*lambda and C = 2*(c-1)*S - lambda^2.
  if (a > lambda) {
    double hi = std::min(c * lambda, a);
    double B = 2.0 * c * lambda;
    double C = 2.0 * (c - 1.0) * S - lambda * lambda;
    double A2 = -(a + B);
    double A1 = (a * B - C) + 2.0 / rho;
    double A0 = a * C - 2.0 * c * lambda / rho;
    double roots[3];
    int nr = solve_cubic_real(A2, A1, A0, roots);
    for (int i = 0; i < nr; ++i)
      if (std::isfinite(roots[i]) && roots[i] > lambda && roots[i] < hi)
        cand.push_back(roots[i]);
  }

  // Beyond c*lambda the penalty is flat, so t = a is the only stationary
  // point there and is already a candidate.

  std::sort(cand.begin(), cand.end());
  double best_t = cand.front();
  double best_g = g(best_t);
  for (size_t i = 1; i < cand.size(); ++i) {
    double v = g(cand[i]);
    if (v < best_g) {
      best_g = v;
      best_t = cand[i];
    }
  }
  return sgn * best_t;
}

ProxResult prox_column(const Eigen::VectorXd& z, double rho, double lambda,
                       double c, double tol, int max_iter) {
  check_scad_params(lambda, c);
  if (!(rho > 0.0)) throw std::invalid_argument("prox_column: rho must be > 0");
  if (!(tol > 0.0) || max_iter < 1)
    throw std::invalid_argument("prox_column: bad tol/max_iter");

  ProxResult res;
  if (lambda == 0.0) {
    res.theta_hat = z;
    res.objective_value = prox_objective(z, z, rho, lambda, c);
    res.converged = true;
    res.iterations = 0;
    return res;
  }

  Eigen::VectorXd theta = z;
  Eigen::Index m = z.size();
  double total = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) total += scad(theta[k], lambda, c);

  for (int sweep = 1; sweep <= max_iter; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (z[k] == 0.0) {
        theta[k] = 0.0;
        continue;
      }
      double s_other = std::max(0.0, total - scad(theta[k], lambda, c));
      double t = solve_1d(z[k], s_other, rho, lambda, c);
      max_change = std::max(max_change, std::abs(t - theta[k]));
      theta[k] = t;
      total = s_other + scad(t, lambda, c);
    }
    res.iterations = sweep;
    if (max_change < tol) {
      res.converged = true;
      break;
    }
  }

  // The all-zero point is compared explicitly so the optimality bound
  // L(theta_hat) <= min(L(z), L(0)) holds even outside the convex regime.
  double obj = prox_objective(z, theta, rho, lambda, c);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(m);
  double obj0 = prox_objective(z, zero, rho, lambda, c);
  if (obj0 < obj) {
    theta = zero;
    obj = obj0;
  }
  res.theta_hat = std::move(theta);
  res.objective_value = obj;
  return res;
}

std::vector<PartitionCell> partition_grid(double z_range, double step,
                                          double rho, double lambda, double c) {
  if (!(z_range > 0.0) || !(step > 0.0))
    throw std::invalid_argument("partition_grid: range and step must be > 0");
  long long n = llround(2.0 * z_range / step) + 1;
  std::vector<PartitionCell> cells;
  cells.reserve(static_cast<size_t>(n * n));
  Eigen::VectorXd z(2);
  for (long long i = 0; i < n; ++i) {
    double z1 = -z_range + static_cast<double>(i) * step;
    for (long long j = 0; j < n; ++j) {
      double z2 = -z_range + static_cast<double>(j) * step;
      z[0] = z1;
      z[1] = z2;
      ProxResult pr = prox_column(z, rho, lambda, c);
      int nnz = (pr.theta_hat[0] != 0.0) + (pr.theta_hat[1] != 0.0);
      cells.push_back({z1, z2, nnz});
    }
  }
  return cells;
}

std::string partition_to_csv(const std::vector<PartitionCell>& cells) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << "z1,z2,nonzeros\n";
  for (const auto& c : cells) os << c.z1 << ',' << c.z2 << ',' << c.nonzeros << '\n';
  return os.str();
}

}  // namespace gscad
