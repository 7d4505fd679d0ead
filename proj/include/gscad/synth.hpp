// Synthetic bar-dictionary benchmark: ground-truth generation, sparse signal
// sampling, signal-domain PSNR, and the repeated learn/evaluate experiment.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gscad/learner.hpp"

namespace gscad {

struct SynthConfig {
  int n_train = 1500;
  int n_test = 1000;
  int sparsity = 3;
  double coef_low = 0.0;
  double coef_high = 1.0 / 3.0;
  double sigma = 0.025;
  int p0 = 20;
  int repetitions = 20;
  std::uint64_t seed = 0;
  LearnConfig learn;
  // Penalties sized for binary sup-norm-1 atoms and Unif(0,1/3) coefficients:
  // pruning requires c*lambda1 > 1 so unit entries sit inside the SCAD
  // shrinkage zone, and lambda2 small enough that exact atoms out-compete
  // two-bar composites in the coding step.
  SynthConfig() {
    learn.params.lambda1 = 0.4;
    learn.params.lambda2 = 0.15;
    learn.params.rho = 0.25;
    learn.outer_max_iter = 200;
    learn.admm_max_iter = 50;
  }
  void validate() const;
};

// Ground-truth dictionary: ten binary bar atoms on a 10x10 patch (five
// horizontal and five vertical bars of width 2), vectorized column-major.
// Any two distinct atoms have |Pearson correlation| <= 0.25.
Dictionary generate_d0();

struct SignalBatchResult {
  Eigen::MatrixXd clean;   // m x n
  Eigen::MatrixXd noisy;   // clean + N(0, sigma^2), equal to clean when sigma == 0
  std::vector<std::vector<int>> supports;  // sparsity distinct atom indices each
};

// n signals, each a combination of `sparsity` distinct atoms with
// Unif(coef_low, coef_high) coefficients; deterministic in seed.
SignalBatchResult generate_signals(const Dictionary& d0, int n,
                                   const SynthConfig& cfg, std::uint64_t seed);

// 10*log10(sum ||x||^2 / sum ||x_hat - x||^2); +inf for exact recovery,
// throws when the clean batch has zero energy.
double psnr_signals(const Eigen::MatrixXd& clean, const Eigen::MatrixXd& recon);

struct RepetitionRecord {
  int p_hat = 0;
  double psnr_db = 0.0;
  double psnr_identity_db = 0.0;  // baseline x_hat = y on the same test split
  bool failed = false;
};

struct ExperimentRow {
  double sigma = 0.0;
  int p0 = 0;
  double mean_p_hat = 0.0;
  double sd_p_hat = 0.0;
  double psnr_q1 = 0.0;
  double psnr_median = 0.0;
  double psnr_q3 = 0.0;
  int failures = 0;
};

struct ExperimentResult {
  ExperimentRow row;
  std::vector<RepetitionRecord> repetitions;
};

// Runs cfg.repetitions independent train/evaluate cycles: learn on noisy
// training signals, code noisy test signals with omp_fixed(k = sparsity),
// score PSNR against the clean test signals. Failed repetitions (collapsed
// dictionaries) are counted, not dropped. Deterministic in cfg.seed.
ExperimentResult run_experiment(const SynthConfig& cfg);

// CSV with header
// "sigma,p0,mean_p_hat,sd_p_hat,psnr_q1,psnr_median,psnr_q3".
std::string experiment_rows_to_csv(const std::vector<ExperimentRow>& rows);

// Sample mean / sd (n-1 denominator) and linearly interpolated quartiles.
double sample_mean(const std::vector<double>& v);
double sample_sd(const std::vector<double>& v);
double quantile_type7(std::vector<double> v, double q);

}  // namespace gscad
