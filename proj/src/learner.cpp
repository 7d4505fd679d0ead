#include "gscad/learner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gscad/util.hpp"

namespace gscad {

double Dictionary::max_sup_norm() const {
  if (atoms.size() == 0) return 0.0;
  return atoms.cwiseAbs().maxCoeff();
}

void LearnConfig::validate() const {
  params.validate();
  if (p0 < 1) throw std::invalid_argument("p0 must be >= 1");
  if (!(outer_tol > 0.0) || outer_max_iter < 0)
    throw std::invalid_argument("bad outer loop settings");
  if (!(admm_tol > 0.0) || admm_max_iter < 1)
    throw std::invalid_argument("bad admm settings");
  if (!(prox_tol > 0.0) || prox_max_iter < 1)
    throw std::invalid_argument("bad prox settings");
  if (!(lasso_tol > 0.0) || lasso_max_iter < 1)
    throw std::invalid_argument("bad lasso settings");
  if (!(dedup_threshold > 0.0) || !(dedup_threshold <= 1.0))
    throw std::invalid_argument("dedup threshold must be in (0, 1]");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

Dictionary init_uniform(int m, int p, std::uint64_t seed) {
  if (m < 1 || p < 1) throw std::invalid_argument("init_uniform: bad shape");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Dictionary d;
  d.atoms.resize(m, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < m; ++i) d.atoms(i, j) = unif(rng);
  return d;
}

Dictionary init_redundant_dct(int patch_size, int p) {
  if (patch_size < 1) throw std::invalid_argument("init_redundant_dct: bad patch size");
  int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(p))));
  if (r * r != p || r < patch_size)
    throw std::invalid_argument(
        "init_redundant_dct: p must be a perfect square with sqrt(p) >= patch_size");
  Eigen::MatrixXd b1(patch_size, r);
  for (int k = 0; k < r; ++k)
    for (int i = 0; i < patch_size; ++i)
      b1(i, k) = std::cos(static_cast<double>(i) * static_cast<double>(k) * M_PI /
                          static_cast<double>(r));
  Dictionary d;
  d.atoms.resize(patch_size * patch_size, p);
  for (int k1 = 0; k1 < r; ++k1)
    for (int k2 = 0; k2 < r; ++k2) {
      int col = k1 * r + k2;
      // patch(i, j) = b1(i, k1) * b1(j, k2), vectorized column-major
      for (int j = 0; j < patch_size; ++j)
        for (int i = 0; i < patch_size; ++i)
          d.atoms(j * patch_size + i, col) = b1(i, k1) * b1(j, k2);
      double sup = d.atoms.col(col).cwiseAbs().maxCoeff();
      d.atoms.col(col) /= sup;
    }
  return d;
}

Dictionary prune_zero_columns(const Dictionary& d, std::vector<int>* removed) {
  std::vector<int> keep;
  for (int j = 0; j < d.num_atoms(); ++j) {
    bool zero = true;
    for (int i = 0; i < d.dim() && zero; ++i) zero = d.atoms(i, j) == 0.0;
    if (zero) {
      if (removed) removed->push_back(j);
    } else {
      keep.push_back(j);
    }
  }
  Dictionary out;
  out.atoms.resize(d.dim(), static_cast<Eigen::Index>(keep.size()));
  for (size_t s = 0; s < keep.size(); ++s)
    out.atoms.col(static_cast<Eigen::Index>(s)) = d.atoms.col(keep[s]);
  return out;
}

static double pearson_abs(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  double mu = u.mean(), mv = v.mean();
  Eigen::VectorXd uc = u.array() - mu, vc = v.array() - mv;
  double nu = uc.squaredNorm(), nv = vc.squaredNorm();
  if (nu <= 1e-24 || nv <= 1e-24) return 0.0;  // zero-variance columns never correlate
  return std::abs(uc.dot(vc)) / std::sqrt(nu * nv);
}

Dictionary dedup_correlated(const Dictionary& d, double threshold,
                            std::vector<int>* removed) {
  if (!(threshold > 0.0) || !(threshold <= 1.0))
    throw std::invalid_argument("dedup_correlated: threshold must be in (0, 1]");
  std::vector<int> keep;
  for (int j = 0; j < d.num_atoms(); ++j) {
    bool dup = false;
    for (int k : keep) {
      if (pearson_abs(d.atoms.col(j), d.atoms.col(k)) > threshold) {
        dup = true;
        break;
      }
    }
    if (dup) {
      if (removed) removed->push_back(j);
    } else {
      keep.push_back(j);
    }
  }
  Dictionary out;
  out.atoms.resize(d.dim(), static_cast<Eigen::Index>(keep.size()));
  for (size_t s = 0; s < keep.size(); ++s)
    out.atoms.col(static_cast<Eigen::Index>(s)) = d.atoms.col(keep[s]);
  return out;
}

AdmmResult admm_update(const Eigen::MatrixXd& Y, const CodeMatrix& A,
                       const Dictionary& d_init, const LearnConfig& cfg) {
  cfg.validate();
  const Eigen::Index m = Y.rows(), n = Y.cols();
  const Eigen::Index p = A.data.rows();
  if (A.data.cols() != n) throw std::invalid_argument("admm_update: code count mismatch");
  if (d_init.atoms.rows() != m || d_init.atoms.cols() != p)
    throw std::invalid_argument("admm_update: dictionary shape mismatch");

  const double rho = cfg.params.rho;
  const double lambda1 = cfg.params.lambda1;
  const double c = cfg.params.c;

  // A is fixed for the whole update, so factor A*A' + rho*I once.
  Eigen::MatrixXd gram = A.data * A.data.transpose();
  gram.diagonal().array() += rho;
  Eigen::LDLT<Eigen::MatrixXd> solver(gram);
  Eigen::MatrixXd yat = Y * A.data.transpose();

  AdmmResult res;
  AdmmState& st = res.state;
  st.d1.resize(m, p);
  st.d2 = Eigen::MatrixXd::Zero(m, p);
  st.xi = Eigen::MatrixXd::Zero(m, p);

  for (int it = 1; it <= cfg.admm_max_iter; ++it) {
    Eigen::MatrixXd rhs = yat + rho * (st.d2 - st.xi);
    st.d1 = solver.solve(rhs.transpose()).transpose();
    for (Eigen::Index j = 0; j < p; ++j) {
      double sup = st.d1.col(j).cwiseAbs().maxCoeff();
      if (sup > 1.0) st.d1.col(j) /= sup;
    }
    parallel_for(static_cast<int>(p), cfg.threads, [&](int j) {
      ProxResult pr = prox_column(st.d1.col(j) + st.xi.col(j), rho, lambda1, c,
                                  cfg.prox_tol, cfg.prox_max_iter);
      st.d2.col(j) = pr.theta_hat;
    });
    st.xi += st.d1 - st.d2;
    double resid = (st.d1 - st.d2).norm();
    st.primal_residuals.push_back(resid);
    st.iterations = it;
    if (resid < cfg.admm_tol) {
      st.converged = true;
      break;
    }
  }

  Dictionary d2;
  d2.atoms = st.d2;
  // Final sup-norm scaling keeps the constraint set exact even when the ADMM
  // loop stops at a loose residual.
  for (Eigen::Index j = 0; j < p; ++j) {
    double sup = d2.atoms.col(j).cwiseAbs().maxCoeff();
    if (sup > 1.0) d2.atoms.col(j) /= sup;
  }
  res.dictionary = prune_zero_columns(d2, &res.removed_columns);
  return res;
}

LearnReport learn(const Eigen::MatrixXd& Y, const LearnConfig& cfg) {
  cfg.validate();
  return learn_with_init(Y, init_uniform(static_cast<int>(Y.rows()), cfg.p0, cfg.seed), cfg);
}

LearnReport learn_with_init(const Eigen::MatrixXd& Y, const Dictionary& d0,
                            const LearnConfig& cfg) {
  cfg.validate();
  if (d0.atoms.rows() != Y.rows())
    throw std::invalid_argument("learn: dictionary/signal dimension mismatch");
  if (d0.empty()) throw std::invalid_argument("learn: empty initial dictionary");

  LearnReport rep;
  rep.dictionary = d0;
  rep.atom_count_history.push_back(d0.num_atoms());

  Eigen::MatrixXd a_prev;   // codes from the previous iteration, current atom rows
  Eigen::MatrixXd a_compare;  // codes as computed in the previous iteration
  Eigen::MatrixXd d_prev = d0.atoms;
  bool have_warm = false, have_prev_codes = false;

  const double inf = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= cfg.outer_max_iter; ++t) {
    LassoBatchResult batch =
        lasso_batch(rep.dictionary.atoms, Y, cfg.params.lambda2, cfg.lasso_tol,
                    cfg.lasso_max_iter, have_warm ? &a_prev : nullptr, cfg.threads);
    Eigen::MatrixXd codes = batch.codes.data;

    AdmmResult admm = admm_update(Y, batch.codes, rep.dictionary, cfg);

    // Map code rows onto the atoms that survived pruning, then dedup.
    std::vector<int> survivors;
    {
      std::vector<char> dropped(static_cast<size_t>(codes.rows()), 0);
      for (int j : admm.removed_columns) dropped[static_cast<size_t>(j)] = 1;
      for (Eigen::Index j = 0; j < codes.rows(); ++j)
        if (!dropped[static_cast<size_t>(j)]) survivors.push_back(static_cast<int>(j));
    }
    std::vector<int> dedup_removed;
    Dictionary d_new =
        dedup_correlated(admm.dictionary, cfg.dedup_threshold, &dedup_removed);
    {
      std::vector<char> dropped(survivors.size(), 0);
      for (int j : dedup_removed) dropped[static_cast<size_t>(j)] = 1;
      std::vector<int> kept;
      for (size_t s = 0; s < survivors.size(); ++s)
        if (!dropped[s]) kept.push_back(survivors[s]);
      survivors = std::move(kept);
    }

    rep.outer_iterations = t;
    rep.atom_count_history.push_back(d_new.num_atoms());
    if (d_new.empty()) {
      rep.dictionary = d_new;
      rep.aborted_empty = true;
      break;
    }

    Eigen::MatrixXd a_new(static_cast<Eigen::Index>(survivors.size()), codes.cols());
    for (size_t s = 0; s < survivors.size(); ++s)
      a_new.row(static_cast<Eigen::Index>(s)) = codes.row(survivors[s]);

    double d_change = inf, a_change = inf;
    if (d_new.atoms.rows() == d_prev.rows() && d_new.atoms.cols() == d_prev.cols())
      d_change = (d_new.atoms - d_prev).cwiseAbs().maxCoeff();
    if (have_prev_codes && codes.rows() == a_compare.rows())
      a_change = (codes - a_compare).cwiseAbs().maxCoeff();

    rep.dictionary = d_new;
    d_prev = d_new.atoms;
    a_compare = codes;
    have_prev_codes = true;
    a_prev = std::move(a_new);
    have_warm = true;

    if (d_change <= cfg.outer_tol && a_change <= cfg.outer_tol) {
      rep.converged = true;
      break;
    }
  }

  rep.p_hat = rep.dictionary.num_atoms();
  return rep;
}

std::string dictionary_to_csv(const Dictionary& d) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  for (int j = 0; j < d.num_atoms(); ++j) {
    if (j) os << ',';
    os << "atom_" << j;
  }
  os << '\n';
  for (int i = 0; i < d.dim(); ++i) {
    for (int j = 0; j < d.num_atoms(); ++j) {
      if (j) os << ',';
      os << d.atoms(i, j);
    }
    os << '\n';
  }
  return os.str();
}

Dictionary dictionary_from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty dictionary file: " + path);
  if (header.rfind("atom_0", 0) != 0)
    throw std::runtime_error("bad dictionary header in " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("ragged dictionary rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("dictionary has no rows: " + path);
  Dictionary d;
  d.atoms.resize(static_cast<Eigen::Index>(rows.size()),
                 static_cast<Eigen::Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows.front().size(); ++j)
      d.atoms(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return d;
}

std::string report_to_json(const LearnReport& r) {
  nlohmann::json j;
  j["p_hat"] = r.p_hat;
  j["iterations"] = r.outer_iterations;
  j["converged"] = r.converged;
  j["atom_count_history"] = r.atom_count_history;
  return j.dump(2) + "\n";
}

}  // namespace gscad
