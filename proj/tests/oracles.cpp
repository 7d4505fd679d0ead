#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

double scad_value(double d, double lambda, double c) {
  double a = std::abs(d);
  if (a <= lambda) return lambda * a;
  if (a <= c * lambda)
    return -(a * a - 2.0 * c * lambda * a + lambda * lambda) / (2.0 * (c - 1.0));
  return (c + 1.0) * lambda * lambda / 2.0;
}

double prox_objective(const Eigen::VectorXd& z, const Eigen::VectorXd& theta,
                      double rho, double lambda, double c) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < theta.size(); ++k)
    total += scad_value(theta[k], lambda, c);
  return 0.5 * rho * (z - theta).squaredNorm() + std::log1p(total);
}

namespace {

// Grid minimization of g(i) = 0.5*rho*(a - i*h)^2 + log(S + scad(i*h)) over
// i = 0..n plus the exact endpoint a; returns the winning t.
double line_min_impl(double a, double s_other, double rho, double lambda,
                     double c, double h, bool exhaustive) {
  const double S = 1.0 + s_other;
  auto g = [&](double t) {
    return 0.5 * rho * (a - t) * (a - t) + std::log(S + scad_value(t, lambda, c));
  };
  long long n = static_cast<long long>(std::floor(a / h));
  auto at = [&](long long i) { return (i >= n) ? a : static_cast<double>(i) * h; };

  long long lo = 0, hi = n;
  if (!exhaustive && n > 4096) {
    const long long K = 1024;
    long long best_i = 0;
    double best_g = g(at(0));
    for (long long i = K; i <= n; i += K) {
      double v = g(at(i));
      if (v < best_g) {
        best_g = v;
        best_i = i;
      }
    }
    double vend = g(a);
    if (vend < best_g) best_i = n;
    lo = std::max<long long>(0, best_i - K);
    hi = std::min<long long>(n, best_i + K);
  }

  double best_t = at(lo), best_g = g(best_t);
  for (long long i = lo + 1; i <= hi; ++i) {
    double t = at(i);
    double v = g(t);
    if (v < best_g) {
      best_g = v;
      best_t = t;
    }
  }
  // the fine window never skips these two anchors
  if (g(0.0) < best_g) {
    best_g = g(0.0);
    best_t = 0.0;
  }
  if (g(a) < best_g) best_t = a;
  return best_t;
}

}  // namespace

double grid_line_min(double z, double s_other, double rho, double lambda,
                     double c, double step, bool exhaustive) {
  if (z == 0.0) return 0.0;
  double sgn = z > 0.0 ? 1.0 : -1.0;
  return sgn * line_min_impl(std::abs(z), s_other, rho, lambda, c, step, exhaustive);
}

Eigen::VectorXd grid_prox(const Eigen::VectorXd& z, double rho, double lambda,
                          double c, double step, bool exhaustive) {
  if (lambda == 0.0) return z;
  Eigen::VectorXd theta = z;
  const Eigen::Index m = z.size();
  for (int sweep = 0; sweep < 300; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (z[k] == 0.0) {
        theta[k] = 0.0;
        continue;
      }
      double s_other = 0.0;
      for (Eigen::Index j = 0; j < m; ++j)
        if (j != k) s_other += scad_value(theta[j], lambda, c);
      double t = grid_line_min(z[k], s_other, rho, lambda, c, step, exhaustive);
      max_change = std::max(max_change, std::abs(t - theta[k]));
      theta[k] = t;
    }
    if (max_change < 0.5 * step) break;
  }
  return theta;
}

namespace {

double chi2_pdf(int dof, double t) {
  if (t < 0.0) return 0.0;
  double a = 0.5 * dof;
  if (t == 0.0) {
    if (dof == 2) return 0.5;
    return 0.0;  // dof >= 3; dof == 1 never evaluates here
  }
  return std::exp((a - 1.0) * std::log(t) - 0.5 * t - a * std::log(2.0) -
                  std::lgamma(a));
}

double simpson(const std::function<double(double)>& f, double lo, double hi,
               int intervals) {
  if (intervals % 2) ++intervals;
  double h = (hi - lo) / intervals;
  double sum = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i)
    sum += f(lo + i * h) * ((i % 2) ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace

double simpson_chi2_cdf(int dof, double x) {
  if (dof < 1) throw std::invalid_argument("simpson_chi2_cdf: dof must be >= 1");
  if (x <= 0.0) return 0.0;
  if (dof == 1) {
    // t = u^2 turns the integrand into 2*phi(u) on [0, sqrt(x)]
    auto f = [](double u) {
      return 2.0 * std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
    };
    return simpson(f, 0.0, std::sqrt(x), 20000);
  }
  auto f = [dof](double t) { return chi2_pdf(dof, t); };
  return simpson(f, 0.0, x, 20000);
}

double simpson_chi2_quantile(int dof, double tau) {
  if (!(tau > 0.0) || !(tau < 1.0))
    throw std::invalid_argument("simpson_chi2_quantile: tau in (0,1)");
  double lo = 0.0, hi = static_cast<double>(dof);
  while (simpson_chi2_cdf(dof, hi) < tau) hi *= 2.0;
  for (int it = 0; it < 80 && (hi - lo) > 1e-12 * std::max(1.0, hi); ++it) {
    double mid = 0.5 * (lo + hi);
    if (simpson_chi2_cdf(dof, mid) < tau)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double prox_gradient_lasso_objective(const Eigen::MatrixXd& D,
                                     const Eigen::VectorXd& y, double lambda2,
                                     int iters) {
  const Eigen::Index p = D.cols();
  Eigen::MatrixXd gram = D.transpose() * D;
  // power iteration for the Lipschitz constant
  Eigen::VectorXd v = Eigen::VectorXd::Ones(p).normalized();
  double L = 1.0;
  for (int i = 0; i < 200; ++i) {
    v = gram * v;
    L = v.norm();
    if (L == 0.0) break;
    v /= L;
  }
  L = std::max(L, 1e-12);
  const double step = 1.0 / L;

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd dty = D.transpose() * y;
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd grad = gram * alpha - dty;
    Eigen::VectorXd u = alpha - step * grad;
    for (Eigen::Index j = 0; j < p; ++j) {
      double t = lambda2 * step;
      alpha[j] = (u[j] > t) ? u[j] - t : ((u[j] < -t) ? u[j] + t : 0.0);
    }
  }
  return 0.5 * (y - D * alpha).squaredNorm() + lambda2 * alpha.lpNorm<1>();
}

ProxInstance random_convex_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ProxInstance inst;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    int m = 1 + static_cast<int>(unif(rng) * 4.0);
    m = std::min(m, 4);
    inst.z.resize(m);
    int nnz = 0;
    for (int k = 0; k < m; ++k) {
      if (unif(rng) < 0.15) {
        inst.z[k] = 0.0;
      } else {
        inst.z[k] = -2.2 + 4.4 * unif(rng);
        if (inst.z[k] != 0.0) ++nnz;
      }
    }
    inst.rho = 0.7 + 1.3 * unif(rng);
    inst.lambda = 0.05 + 0.65 * unif(rng);
    inst.c = 2.2 + 1.8 * unif(rng);
    int c0 = std::max(1, nnz);
    double l2 = inst.lambda * inst.lambda;
    bool ok = l2 <= inst.rho / c0 &&
              (inst.c - 1.0) * (inst.rho * (1.0 + l2) * (1.0 + l2) - c0 * l2) >=
                  1.0 + l2;
    if (ok) return inst;
  }
  // fall back to a known-good setting
  inst.z = Eigen::VectorXd::Constant(2, 0.8);
  inst.rho = 1.0;
  inst.lambda = 0.5;
  inst.c = 3.0;
  return inst;
}

Eigen::MatrixXd make_test_image(int rows, int cols) {
  Eigen::MatrixXd img(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double v = 110.0 + 55.0 * std::sin(2.0 * M_PI * r / 39.0) *
                             std::cos(2.0 * M_PI * c / 29.0);
      double dr = r - 0.35 * rows, dc = c - 0.4 * cols;
      double s = 0.12 * rows;
      v += 60.0 * std::exp(-(dr * dr + dc * dc) / (2.0 * s * s));
      v -= 45.0 * ((r / 23 + c / 31) % 2);
      img(r, c) = std::clamp(v, 0.0, 255.0);
    }
  return img;
}

}  // namespace oracle
