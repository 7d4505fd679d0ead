// ADMM dictionary update with group-sparse atom elimination and the
// alternating sparse-coding / dictionary-update learner built on it.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gscad/coding.hpp"
#include "gscad/penalty.hpp"

namespace gscad {

// Column dictionary; every atom satisfies ||d_j||_inf <= 1 + 1e-12.
struct Dictionary {
  Eigen::MatrixXd atoms;  // m x p
  int dim() const { return static_cast<int>(atoms.rows()); }
  int num_atoms() const { return static_cast<int>(atoms.cols()); }
  bool empty() const { return atoms.cols() == 0; }
  double max_sup_norm() const;
};

// Atoms i.i.d. Unif(0, 1), deterministic in seed.
Dictionary init_uniform(int m, int p, std::uint64_t seed);

// Overcomplete 2-D DCT: 1-D atoms cos(i*k*pi/r) on i = 0..patch_size-1 for
// k = 0..r-1 (k = 0 is the constant atom), all pairwise outer products,
// columns scaled to sup-norm 1. Requires p a perfect square with
// sqrt(p) >= patch_size.
Dictionary init_redundant_dct(int patch_size, int p);

struct LearnConfig {
  PenaltyParams params;
  int p0 = 20;
  double outer_tol = 1e-4;
  int outer_max_iter = 30;
  double admm_tol = 1e-6;
  int admm_max_iter = 300;
  double prox_tol = 1e-8;
  int prox_max_iter = 200;
  double lasso_tol = 1e-7;
  int lasso_max_iter = 1000;
  double dedup_threshold = 0.95;
  std::uint64_t seed = 0;
  int threads = 1;
  void validate() const;
};

struct AdmmState {
  Eigen::MatrixXd d1, d2, xi;
  std::vector<double> primal_residuals;  // ||D1 - D2||_F per iteration
  int iterations = 0;
  bool converged = false;
};

struct AdmmResult {
  Dictionary dictionary;           // D2 with zero columns removed
  std::vector<int> removed_columns;  // indices into the pre-prune dictionary
  AdmmState state;
};

// One dictionary update for fixed codes A: alternates the ridge step
// D1 <- (Y*A' + rho*(D2 - xi)) * (A*A' + rho*I)^{-1}, sup-norm column
// normalization d1_j <- d1_j / max(||d1_j||_inf, 1), the columnwise prox of
// d1_j + xi_j, and the dual update xi <- xi + D1 - D2. D2 and xi start at
// zero; stops when ||D1 - D2||_F < admm_tol. Exact-zero columns of D2 are
// pruned from the returned dictionary.
AdmmResult admm_update(const Eigen::MatrixXd& Y, const CodeMatrix& A,
                       const Dictionary& d_init, const LearnConfig& cfg);

// Removes exactly-zero columns; returns the surviving dictionary and the
// removed indices.
Dictionary prune_zero_columns(const Dictionary& d, std::vector<int>* removed);

// Greedy dedup: scanning columns left to right, drops any column whose
// absolute Pearson correlation with an earlier kept column exceeds the
// threshold. Zero-variance columns never correlate.
Dictionary dedup_correlated(const Dictionary& d, double threshold,
                            std::vector<int>* removed);

struct LearnReport {
  Dictionary dictionary;
  int p_hat = 0;
  int outer_iterations = 0;
  bool converged = false;
  std::vector<int> atom_count_history;  // p0 followed by one entry per iteration
  bool aborted_empty = false;           // every atom was pruned
};

// Alternates lasso_batch coding with admm_update + dedup, warm-starting each
// coding stage on the code rows of surviving atoms. Stops when the sup-norm
// change of both the dictionary and the codes is <= outer_tol.
LearnReport learn(const Eigen::MatrixXd& Y, const LearnConfig& cfg);
LearnReport learn_with_init(const Eigen::MatrixXd& Y, const Dictionary& d0,
                            const LearnConfig& cfg);

// CSV with header "atom_0,...,atom_{p-1}" and one row per signal dimension.
std::string dictionary_to_csv(const Dictionary& d);
Dictionary dictionary_from_csv_file(const std::string& path);

// JSON object with keys p_hat, iterations, converged, atom_count_history.
std::string report_to_json(const LearnReport& r);

}  // namespace gscad
