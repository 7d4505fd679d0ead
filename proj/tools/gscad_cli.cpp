// Command-line front end: synthetic benchmark grid, image denoising, batch
// dictionary training, and the 1-D/2-D prox demonstration sweeps.
#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "gscad/coding.hpp"
#include "gscad/imaging.hpp"
#include "gscad/learner.hpp"
#include "gscad/penalty.hpp"
#include "gscad/synth.hpp"
#include "gscad/util.hpp"

namespace {

struct GlobalOpts {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  int threads = 1;
};

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void warn_if_nonconvex(double rho, double lambda1, double c, int c0) {
  if (!gscad::convexity_condition(rho, lambda1, c, c0))
    std::cerr << "warning: prox objective may be non-convex for rho=" << rho
              << " lambda=" << lambda1 << " c=" << c << " c0=" << c0
              << "; results remain deterministic\n";
}

struct SynthOpts {
  std::vector<double> sigmas{0.01, 0.025, 0.05, 0.1};
  std::vector<int> p0s{10, 15, 20, 50};
  int reps = 20;
  int n_train = 1500;
  int n_test = 1000;
  double lambda1 = 0.4;
  double lambda2 = 0.15;
  double c = 3.0;
  double rho = 0.25;
  int outer_iters = 200;
  int admm_iters = 50;
};

int run_synth(const GlobalOpts& g, const SynthOpts& o) {
  std::vector<gscad::ExperimentRow> rows;
  std::size_t cell = 0;
  for (double sigma : o.sigmas)
    for (int p0 : o.p0s) {
      gscad::SynthConfig cfg;
      cfg.sigma = sigma;
      cfg.p0 = p0;
      cfg.repetitions = o.reps;
      cfg.n_train = o.n_train;
      cfg.n_test = o.n_test;
      cfg.seed = gscad::derive_seed(g.seed, cell++);
      cfg.learn.params.lambda1 = o.lambda1;
      cfg.learn.params.lambda2 = o.lambda2;
      cfg.learn.params.c = o.c;
      cfg.learn.params.rho = o.rho;
      cfg.learn.outer_max_iter = o.outer_iters;
      cfg.learn.admm_max_iter = o.admm_iters;
      cfg.learn.threads = g.threads;
      gscad::ExperimentResult res = gscad::run_experiment(cfg);
      rows.push_back(res.row);
      std::cout << "sigma=" << sigma << " p0=" << p0
                << " mean_p_hat=" << res.row.mean_p_hat
                << " psnr_median=" << res.row.psnr_median
                << " failures=" << res.row.failures << "\n";
    }
  gscad::write_file_atomic(join_path(g.out_dir, "synth_table.csv"),
                           gscad::experiment_rows_to_csv(rows));
  return 0;
}

struct DenoiseOpts {
  std::string input;
  double sigma = 10.0;
  double tau = 0.9;
  double lambda1 = 0.05;
  double lambda2 = -1.0;  // < 0 selects the sigma-scaled default
  double c = 3.0;
  double rho = 1.0;
  int patch = 8;
  int p0 = 256;
  int subsample = 0;
  int outer_iters = 15;
  int admm_iters = 300;
};

int run_denoise(const GlobalOpts& g, const DenoiseOpts& o) {
  gscad::GrayImage clean = gscad::read_pgm(o.input);
  gscad::GrayImage noisy =
      gscad::add_gaussian_noise(clean, o.sigma, gscad::derive_seed(g.seed, 0xA0));

  gscad::LearnConfig cfg;
  cfg.params.lambda1 = o.lambda1;
  cfg.params.lambda2 = o.lambda2 >= 0.0 ? o.lambda2 : 1.2 * o.sigma;
  cfg.params.c = o.c;
  cfg.params.rho = o.rho;
  cfg.p0 = o.p0;
  cfg.outer_max_iter = o.outer_iters;
  cfg.admm_max_iter = o.admm_iters;
  cfg.seed = gscad::derive_seed(g.seed, 0xB0);
  cfg.threads = g.threads;
  warn_if_nonconvex(cfg.params.rho, cfg.params.lambda1, cfg.params.c,
                    o.patch * o.patch);

  gscad::DenoiseConfig dcfg =
      gscad::make_denoise_config(o.sigma, o.tau, o.patch, o.subsample);

  auto t0 = std::chrono::steady_clock::now();
  gscad::DenoiseResult res = gscad::denoise(noisy, o.sigma, cfg, dcfg);
  double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  double psnr_noisy = gscad::psnr_image(clean, noisy);
  double psnr_denoised = gscad::psnr_image(clean, res.image);

  gscad::write_pgm(noisy, join_path(g.out_dir, "noisy.pgm"));
  gscad::write_pgm(res.image, join_path(g.out_dir, "denoised.pgm"));
  gscad::write_file_atomic(join_path(g.out_dir, "dictionary.csv"),
                           gscad::dictionary_to_csv(res.report.dictionary));
  std::ostringstream metrics;
  metrics.precision(std::numeric_limits<double>::max_digits10);
  metrics << "image,sigma,psnr_noisy,psnr_denoised,p_hat,seconds\n"
          << std::filesystem::path(o.input).stem().string() << ',' << o.sigma << ','
          << psnr_noisy << ',' << psnr_denoised << ',' << res.report.p_hat << ','
          << seconds << '\n';
  gscad::write_file_atomic(join_path(g.out_dir, "metrics.csv"), metrics.str());
  std::cout << "psnr_noisy=" << psnr_noisy << " psnr_denoised=" << psnr_denoised
            << " p_hat=" << res.report.p_hat << " seconds=" << seconds << "\n";
  return 0;
}

struct TrainOpts {
  std::string signals;
  int p0 = 20;
  double lambda1 = 0.05;
  double lambda2 = 0.1;
  double c = 3.0;
  double rho = 1.0;
  int outer_iters = 30;
  int admm_iters = 300;
};

int run_train(const GlobalOpts& g, const TrainOpts& o) {
  Eigen::MatrixXd y = gscad::matrix_from_csv_file(o.signals);
  gscad::LearnConfig cfg;
  cfg.params.lambda1 = o.lambda1;
  cfg.params.lambda2 = o.lambda2;
  cfg.params.c = o.c;
  cfg.params.rho = o.rho;
  cfg.p0 = o.p0;
  cfg.outer_max_iter = o.outer_iters;
  cfg.admm_max_iter = o.admm_iters;
  cfg.seed = g.seed;
  cfg.threads = g.threads;
  warn_if_nonconvex(cfg.params.rho, cfg.params.lambda1, cfg.params.c,
                    static_cast<int>(y.rows()));

  gscad::LearnReport report = gscad::learn(y, cfg);
  if (report.aborted_empty)
    throw std::runtime_error("training collapsed every atom to zero; "
                             "lower lambda1 or check the signals");
  gscad::write_file_atomic(join_path(g.out_dir, "dictionary.csv"),
                           gscad::dictionary_to_csv(report.dictionary));
  gscad::write_file_atomic(join_path(g.out_dir, "report.json"),
                           gscad::report_to_json(report));
  std::cout << "p_hat=" << report.p_hat << " iterations=" << report.outer_iterations
            << " converged=" << (report.converged ? "true" : "false") << "\n";
  return 0;
}

struct ProxDemoOpts {
  double lambda = 1.0;
  double c = 3.0;
  double rho = 1.0;
  double range = 4.0;
  double step = 0.05;
};

int run_prox_demo(const GlobalOpts& g, const ProxDemoOpts& o) {
  warn_if_nonconvex(o.rho, o.lambda, o.c, 2);

  std::ostringstream th;
  th.precision(std::numeric_limits<double>::max_digits10);
  th << "z,theta_hat\n";
  long long n = llround(2.0 * o.range / o.step) + 1;
  Eigen::VectorXd z1(1);
  for (long long i = 0; i < n; ++i) {
    double z = -o.range + static_cast<double>(i) * o.step;
    z1[0] = z;
    gscad::ProxResult pr = gscad::prox_column(z1, o.rho, o.lambda, o.c);
    th << z << ',' << pr.theta_hat[0] << '\n';
  }
  gscad::write_file_atomic(join_path(g.out_dir, "threshold.csv"), th.str());

  auto cells = gscad::partition_grid(o.range, o.step, o.rho, o.lambda, o.c);
  gscad::write_file_atomic(join_path(g.out_dir, "partition.csv"),
                           gscad::partition_to_csv(cells));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GSCAD-penalized dictionary learning toolkit"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "RNG seed shared by all stages");
  app.add_option("--out-dir", g.out_dir, "output directory");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);

  SynthOpts so;
  CLI::App* synth = app.add_subcommand("synth", "run the synthetic benchmark grid");
  synth->fallthrough();
  synth->add_option("--sigma", so.sigmas, "noise levels");
  synth->add_option("--p0", so.p0s, "initial dictionary sizes");
  synth->add_option("--reps", so.reps, "repetitions per cell")->check(CLI::PositiveNumber);
  synth->add_option("--n-train", so.n_train, "training signals per repetition");
  synth->add_option("--n-test", so.n_test, "test signals per repetition");
  synth->add_option("--lambda1", so.lambda1, "dictionary penalty weight");
  synth->add_option("--lambda2", so.lambda2, "coding l1 weight");
  synth->add_option("--c", so.c, "SCAD shape parameter");
  synth->add_option("--rho", so.rho, "quadratic coupling weight");
  synth->add_option("--outer-iters", so.outer_iters, "outer iteration cap");
  synth->add_option("--admm-iters", so.admm_iters, "ADMM iteration cap");

  DenoiseOpts dn;
  CLI::App* denoise = app.add_subcommand("denoise", "denoise a PGM image");
  denoise->fallthrough();
  denoise->add_option("--input", dn.input, "clean input image (PGM)")->required();
  denoise->add_option("--sigma", dn.sigma, "noise standard deviation");
  denoise->add_option("--tau", dn.tau, "chi-square quantile level");
  denoise->add_option("--lambda1", dn.lambda1, "dictionary penalty weight");
  denoise->add_option("--lambda2", dn.lambda2, "coding l1 weight (default 1.2*sigma)");
  denoise->add_option("--c", dn.c, "SCAD shape parameter");
  denoise->add_option("--rho", dn.rho, "quadratic coupling weight");
  denoise->add_option("--patch", dn.patch, "patch side length");
  denoise->add_option("--p0", dn.p0, "initial dictionary size (perfect square)");
  denoise->add_option("--subsample", dn.subsample, "training patch subsample (0 = all)");
  denoise->add_option("--outer-iters", dn.outer_iters, "outer iteration cap");
  denoise->add_option("--admm-iters", dn.admm_iters, "ADMM iteration cap");

  TrainOpts tr;
  CLI::App* train = app.add_subcommand("train", "learn a dictionary from CSV signals");
  train->fallthrough();
  train->add_option("--signals", tr.signals, "CSV matrix, one row per dimension")->required();
  train->add_option("--p0", tr.p0, "initial dictionary size");
  train->add_option("--lambda1", tr.lambda1, "dictionary penalty weight");
  train->add_option("--lambda2", tr.lambda2, "coding l1 weight");
  train->add_option("--c", tr.c, "SCAD shape parameter");
  train->add_option("--rho", tr.rho, "quadratic coupling weight");
  train->add_option("--outer-iters", tr.outer_iters, "outer iteration cap");
  train->add_option("--admm-iters", tr.admm_iters, "ADMM iteration cap");

  ProxDemoOpts pd;
  CLI::App* prox = app.add_subcommand("prox-demo", "emit threshold and partition sweeps");
  prox->fallthrough();
  prox->add_option("--lambda", pd.lambda, "penalty level");
  prox->add_option("--c", pd.c, "SCAD shape parameter");
  prox->add_option("--rho", pd.rho, "quadratic coupling weight");
  prox->add_option("--range", pd.range, "grid half-width");
  prox->add_option("--step", pd.step, "grid step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (synth->parsed()) return run_synth(g, so);
    if (denoise->parsed()) return run_denoise(g, dn);
    if (train->parsed()) return run_train(g, tr);
    if (prox->parsed()) return run_prox_demo(g, pd);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
