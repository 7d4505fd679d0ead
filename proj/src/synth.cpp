#include "gscad/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "gscad/coding.hpp"
#include "gscad/util.hpp"

namespace gscad {

void SynthConfig::validate() const {
  if (n_train < 1 || n_test < 1) throw std::invalid_argument("bad signal counts");
  if (sparsity < 1) throw std::invalid_argument("sparsity must be >= 1");
  if (!(coef_low <= coef_high)) throw std::invalid_argument("bad coefficient range");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  if (p0 < 1) throw std::invalid_argument("p0 must be >= 1");
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  learn.validate();
}

Dictionary generate_d0() {
  const int side = 10, width = 2, bars = side / width;
  Dictionary d;
  d.atoms = Eigen::MatrixXd::Zero(side * side, 2 * bars);
  for (int b = 0; b < bars; ++b) {
    // horizontal bar: rows [2b, 2b+1], all columns
    for (int c = 0; c < side; ++c)
      for (int r = width * b; r < width * (b + 1); ++r)
        d.atoms(c * side + r, b) = 1.0;
    // vertical bar: columns [2b, 2b+1], all rows
    for (int c = width * b; c < width * (b + 1); ++c)
      for (int r = 0; r < side; ++r)
        d.atoms(c * side + r, bars + b) = 1.0;
  }
  return d;
}

SignalBatchResult generate_signals(const Dictionary& d0, int n,
                                   const SynthConfig& cfg, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_signals: n must be >= 1");
  const int p = d0.num_atoms();
  if (cfg.sparsity > p)
    throw std::invalid_argument("generate_signals: sparsity exceeds atom count");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(cfg.coef_low, cfg.coef_high);

  SignalBatchResult out;
  out.clean.resize(d0.dim(), n);
  out.noisy.resize(d0.dim(), n);
  out.supports.resize(static_cast<size_t>(n));

  std::vector<int> pool(static_cast<size_t>(p));
  for (int i = 0; i < n; ++i) {
    // distinct atoms via partial Fisher-Yates
    std::iota(pool.begin(), pool.end(), 0);
    std::vector<int>& sup = out.supports[static_cast<size_t>(i)];
    sup.resize(static_cast<size_t>(cfg.sparsity));
    for (int s = 0; s < cfg.sparsity; ++s) {
      std::uniform_int_distribution<int> pick(s, p - 1);
      std::swap(pool[static_cast<size_t>(s)], pool[static_cast<size_t>(pick(rng))]);
      sup[static_cast<size_t>(s)] = pool[static_cast<size_t>(s)];
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d0.dim());
    for (int s = 0; s < cfg.sparsity; ++s) x += coef(rng) * d0.atoms.col(sup[static_cast<size_t>(s)]);
    out.clean.col(i) = x;
    if (cfg.sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, cfg.sigma);
      for (Eigen::Index r = 0; r < x.size(); ++r) x[r] += noise(rng);
    }
    out.noisy.col(i) = x;
  }
  return out;
}

double psnr_signals(const Eigen::MatrixXd& clean, const Eigen::MatrixXd& recon) {
  if (clean.rows() != recon.rows() || clean.cols() != recon.cols())
    throw std::invalid_argument("psnr_signals: shape mismatch");
  double sig = clean.squaredNorm();
  if (sig == 0.0) throw std::invalid_argument("psnr_signals: zero-energy clean batch");
  double err = (recon - clean).squaredNorm();
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(sig / err);
}

double sample_mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("sample_mean: empty");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("sample_sd: empty");
  if (v.size() == 1) return 0.0;
  double m = sample_mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double quantile_type7(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile: empty");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q out of range");
  std::sort(v.begin(), v.end());
  double pos = q * static_cast<double>(v.size() - 1);
  size_t lo = static_cast<size_t>(pos);
  double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

ExperimentResult run_experiment(const SynthConfig& cfg) {
  cfg.validate();
  Dictionary d0 = generate_d0();

  ExperimentResult result;
  result.repetitions.resize(static_cast<size_t>(cfg.repetitions));
  std::vector<double> p_hats, psnrs;

  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    std::uint64_t rep_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
    RepetitionRecord& rec = result.repetitions[static_cast<size_t>(rep)];
    try {
      SignalBatchResult train =
          generate_signals(d0, cfg.n_train, cfg, derive_seed(rep_seed, 1));
      SignalBatchResult test =
          generate_signals(d0, cfg.n_test, cfg, derive_seed(rep_seed, 2));

      LearnConfig lc = cfg.learn;
      lc.p0 = cfg.p0;
      lc.seed = derive_seed(rep_seed, 3);
      LearnReport rep_report = learn(train.noisy, lc);
      if (rep_report.aborted_empty) {
        rec.failed = true;
        continue;
      }

      const Eigen::MatrixXd& dict = rep_report.dictionary.atoms;
      int k = std::min(cfg.sparsity, rep_report.p_hat);
      Eigen::MatrixXd recon(test.clean.rows(), test.clean.cols());
      for (Eigen::Index j = 0; j < test.noisy.cols(); ++j) {
        OmpResult omp = omp_fixed(dict, test.noisy.col(j), k);
        recon.col(j) = dict * omp.alpha;
      }
      rec.p_hat = rep_report.p_hat;
      rec.psnr_db = psnr_signals(test.clean, recon);
      rec.psnr_identity_db = psnr_signals(test.clean, test.noisy);
      p_hats.push_back(static_cast<double>(rec.p_hat));
      psnrs.push_back(rec.psnr_db);
    } catch (const std::exception&) {
      rec.failed = true;
    }
    if (rec.failed) ++result.row.failures;
  }

  result.row.sigma = cfg.sigma;
  result.row.p0 = cfg.p0;
  if (!p_hats.empty()) {
    result.row.mean_p_hat = sample_mean(p_hats);
    result.row.sd_p_hat = sample_sd(p_hats);
    result.row.psnr_q1 = quantile_type7(psnrs, 0.25);
    result.row.psnr_median = quantile_type7(psnrs, 0.5);
    result.row.psnr_q3 = quantile_type7(psnrs, 0.75);
  }
  return result;
}

std::string experiment_rows_to_csv(const std::vector<ExperimentRow>& rows) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << "sigma,p0,mean_p_hat,sd_p_hat,psnr_q1,psnr_median,psnr_q3\n";
  for (const auto& r : rows)
    os << r.sigma << ',' << r.p0 << ',' << r.mean_p_hat << ',' << r.sd_p_hat << ','
       << r.psnr_q1 << ',' << r.psnr_median << ',' << r.psnr_q3 << '\n';
  return os.str();
}

}  // namespace gscad
