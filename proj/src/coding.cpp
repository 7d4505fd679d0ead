#include "gscad/coding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gscad/util.hpp"

namespace gscad {

LassoResult lasso_cd(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                     double lambda2, double tol, int max_iter,
                     const Eigen::VectorXd* warm_start, bool record_objective) {
  const Eigen::Index m = D.rows(), p = D.cols();
  if (m == 0 || p == 0) throw std::invalid_argument("lasso_cd: empty dictionary");
  if (y.size() != m) throw std::invalid_argument("lasso_cd: dimension mismatch");
  if (!(lambda2 >= 0.0)) throw std::invalid_argument("lasso_cd: lambda2 must be >= 0");
  if (!(tol > 0.0) || max_iter < 1) throw std::invalid_argument("lasso_cd: bad tol/max_iter");
  if (warm_start && warm_start->size() != p)
    throw std::invalid_argument("lasso_cd: warm start size mismatch");

  LassoResult res;
  res.alpha = warm_start ? *warm_start : Eigen::VectorXd::Zero(p);
  Eigen::VectorXd colsq(p);
  for (Eigen::Index j = 0; j < p; ++j) colsq[j] = D.col(j).squaredNorm();
  Eigen::VectorXd r = y - D * res.alpha;

  auto push_objective = [&] {
    if (record_objective)
      res.objective_history.push_back(0.5 * r.squaredNorm() +
                                      lambda2 * res.alpha.lpNorm<1>());
  };

  auto sweep_indices = [&](const std::vector<Eigen::Index>& idx) {
    double maxd = 0.0;
    for (Eigen::Index j : idx) {
      double& aj = res.alpha[j];
      if (colsq[j] == 0.0) {
        if (aj != 0.0) {
          r += D.col(j) * aj;
          aj = 0.0;
        }
        continue;
      }
      double gj = D.col(j).dot(r) + colsq[j] * aj;
      double nj = soft_threshold(gj, lambda2) / colsq[j];
      if (nj != aj) {
        r += D.col(j) * (aj - nj);
        maxd = std::max(maxd, std::abs(nj - aj));
        aj = nj;
      }
    }
    return maxd;
  };

  std::vector<Eigen::Index> all(p);
  for (Eigen::Index j = 0; j < p; ++j) all[j] = j;
  const double active_tol = tol / (1.0 + colsq.maxCoeff());
  // an uncapped active phase can starve the full sweeps that admit new atoms
  const int active_budget = 50;

  while (res.sweeps < max_iter) {
    sweep_indices(all);
    ++res.sweeps;
    push_objective();

    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < p; ++j)
      if (res.alpha[j] != 0.0) active.push_back(j);
    for (int b = 0; b < active_budget && res.sweeps < max_iter && !active.empty(); ++b) {
      double d = sweep_indices(active);
      ++res.sweeps;
      push_objective();
      if (d < active_tol) break;
    }

    r = y - D * res.alpha;  // reset incremental-update drift before the check
    double viol = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      double gj = D.col(j).dot(r);
      double vj = (res.alpha[j] == 0.0)
                      ? std::max(0.0, std::abs(gj) - lambda2)
                      : std::abs(gj - lambda2 * (res.alpha[j] > 0.0 ? 1.0 : -1.0));
      viol = std::max(viol, vj);
    }
    res.kkt_violation = viol;
    if (viol <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

LassoBatchResult lasso_batch(const Eigen::MatrixXd& D, const Eigen::MatrixXd& Y,
                             double lambda2, double tol, int max_iter,
                             const Eigen::MatrixXd* warm_start, int threads) {
  const Eigen::Index p = D.cols(), n = Y.cols();
  if (Y.rows() != D.rows()) throw std::invalid_argument("lasso_batch: dimension mismatch");
  if (warm_start && (warm_start->rows() != p || warm_start->cols() != n))
    throw std::invalid_argument("lasso_batch: warm start shape mismatch");

  LassoBatchResult out;
  out.codes.data.resize(p, n);
  out.codes.nnz_per_column.assign(static_cast<size_t>(n), 0);
  std::vector<char> bad(static_cast<size_t>(n), 0);

  parallel_for(static_cast<int>(n), threads, [&](int j) {
    Eigen::VectorXd w;
    const Eigen::VectorXd* wp = nullptr;
    if (warm_start) {
      w = warm_start->col(j);
      wp = &w;
    }
    LassoResult r = lasso_cd(D, Y.col(j), lambda2, tol, max_iter, wp);
    out.codes.data.col(j) = r.alpha;
    int nnz = 0;
    for (Eigen::Index i = 0; i < p; ++i) nnz += (r.alpha[i] != 0.0);
    out.codes.nnz_per_column[static_cast<size_t>(j)] = nnz;
    bad[static_cast<size_t>(j)] = !r.converged;
  });

  for (Eigen::Index j = 0; j < n; ++j)
    if (bad[static_cast<size_t>(j)]) out.nonconverged_columns.push_back(static_cast<int>(j));
  return out;
}

namespace {

// Shared greedy loop; fixed_k < 0 selects the error-constrained mode.
OmpResult omp_core(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                   int fixed_k, double epsilon0) {
  const Eigen::Index m = D.rows(), p = D.cols();
  if (m == 0 || p == 0) throw std::invalid_argument("omp: empty dictionary");
  if (y.size() != m) throw std::invalid_argument("omp: dimension mismatch");
  const bool fixed = fixed_k >= 0;

  Eigen::MatrixXd Dn = D;
  for (Eigen::Index j = 0; j < p; ++j) {
    double nj = Dn.col(j).norm();
    if (nj > 0.0) Dn.col(j) /= nj;
  }

  OmpResult res;
  res.alpha = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd r = y;
  res.residual_norm_sq = r.squaredNorm();
  Eigen::VectorXd coef;
  std::vector<char> selected(static_cast<size_t>(p), 0);

  const Eigen::Index max_support = fixed ? std::min<Eigen::Index>(fixed_k, p)
                                         : std::min(m, p);
  while (true) {
    if (fixed && static_cast<Eigen::Index>(res.support.size()) >= max_support) break;
    if (!fixed) {
      if (res.residual_norm_sq <= epsilon0) break;
      if (static_cast<Eigen::Index>(res.support.size()) >= max_support) break;
    }

    int best = -1;
    double best_corr = -1.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (selected[static_cast<size_t>(j)]) continue;
      double cj = std::abs(Dn.col(j).dot(r));
      if (cj > best_corr) {
        best_corr = cj;
        best = static_cast<int>(j);
      }
    }
    if (best < 0) break;
    if (!fixed && best_corr == 0.0) break;  // residual orthogonal to every atom

    res.support.push_back(best);
    selected[static_cast<size_t>(best)] = 1;

    Eigen::MatrixXd Ds(m, static_cast<Eigen::Index>(res.support.size()));
    for (size_t s = 0; s < res.support.size(); ++s) Ds.col(static_cast<Eigen::Index>(s)) = D.col(res.support[s]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Ds);
    if (qr.rank() < Ds.cols()) {
      res.rank_deficient = true;
      res.support.pop_back();
      break;
    }
    coef = qr.solve(y);
    r = y - Ds * coef;
    res.residual_norm_sq = r.squaredNorm();
    res.residual_history.push_back(res.residual_norm_sq);
  }

  for (size_t s = 0; s < res.support.size(); ++s) res.alpha[res.support[s]] = coef[static_cast<Eigen::Index>(s)];
  if (!fixed) res.budget_unreachable = res.residual_norm_sq > epsilon0;
  return res;
}

}  // namespace

OmpResult omp_fixed(const Eigen::MatrixXd& D, const Eigen::VectorXd& y, int k) {
  if (k < 1 || k > D.cols()) throw std::invalid_argument("omp_fixed: k out of range");
  return omp_core(D, y, k, 0.0);
}

OmpResult omp_error(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                    double epsilon0) {
  if (!(epsilon0 >= 0.0)) throw std::invalid_argument("omp_error: epsilon0 must be >= 0");
  return omp_core(D, y, -1, epsilon0);
}

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0) || !std::isfinite(a) || !std::isfinite(x))
    throw std::invalid_argument("regularized_gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    // series expansion around 0
    double ap = a, del = 1.0 / a, sum = del;
    for (int n = 0; n < 1000; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // continued fraction (modified Lentz) for the upper tail
  const double FPMIN = 1e-300, EPS = 1e-16;
  double b = x + 1.0 - a, cc = 1.0 / FPMIN, d = 1.0 / b, h = d;
  for (int i = 1; i <= 1000; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < FPMIN) d = FPMIN;
    cc = b + an / cc;
    if (std::abs(cc) < FPMIN) cc = FPMIN;
    d = 1.0 / d;
    double delt = d * cc;
    h *= delt;
    if (std::abs(delt - 1.0) < EPS) break;
  }
  double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

double chi2_cdf(int dof, double x) {
  if (dof < 1) throw std::invalid_argument("chi2_cdf: dof must be >= 1");
  if (x <= 0.0) return 0.0;
  return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_quantile(int dof, double tau) {
  if (dof < 1) throw std::invalid_argument("chi2_quantile: dof must be >= 1");
  if (!(tau > 0.0) || !(tau < 1.0))
    throw std::invalid_argument("chi2_quantile: tau must be in (0, 1)");
  double lo = 0.0, hi = static_cast<double>(dof);
  while (chi2_cdf(dof, hi) < tau) {
    hi *= 2.0;
    if (hi > 1e12) break;
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * std::max(1.0, hi); ++it) {
    double mid = 0.5 * (lo + hi);
    if (chi2_cdf(dof, mid) < tau)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double derive_epsilon0(double sigma, double tau, int patch_size) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("derive_epsilon0: sigma must be >= 0");
  if (patch_size < 1) throw std::invalid_argument("derive_epsilon0: patch_size must be >= 1");
  int m = patch_size * patch_size;
  if (sigma == 0.0) return 1e-8 * m;
  return sigma * sigma * chi2_quantile(m, tau);
}

DenoiseConfig make_denoise_config(double sigma, double tau, int patch_size,
                                  int train_subsample) {
  DenoiseConfig cfg;
  cfg.sigma = sigma;
  cfg.tau = tau;
  cfg.patch_size = patch_size;
  cfg.train_subsample = train_subsample;
  cfg.epsilon0 = derive_epsilon0(sigma, tau, patch_size);
  return cfg;
}

}  // namespace gscad
