#include "gscad/imaging.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "gscad/util.hpp"

namespace gscad {

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_pgm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) continue;
    tok.push_back(static_cast<char>(ch));
    while ((ch = in.peek()) != EOF && !std::isspace(ch) && ch != '#')
      tok.push_back(static_cast<char>(in.get()));
    return tok;
  }
  throw std::runtime_error("truncated PGM header");
}

int parse_pgm_int(std::istream& in, const char* what) {
  std::string tok = next_pgm_token(in);
  try {
    size_t pos = 0;
    int v = std::stoi(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("malformed PGM ") + what + ": '" + tok + "'");
  }
}

}  // namespace

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string magic = next_pgm_token(in);
  if (magic != "P5" && magic != "P2")
    throw std::runtime_error("unsupported PGM magic '" + magic + "' in " + path);
  int w = parse_pgm_int(in, "width");
  int h = parse_pgm_int(in, "height");
  int maxval = parse_pgm_int(in, "maxval");
  if (w < 1 || h < 1) throw std::runtime_error("bad PGM dimensions in " + path);
  if (maxval < 1 || maxval > 255)
    throw std::runtime_error("unsupported PGM maxval " + std::to_string(maxval) +
                             " in " + path);
  GrayImage img(h, w);
  if (magic == "P5") {
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> buf(static_cast<size_t>(w) * h);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<size_t>(in.gcount()) != buf.size())
      throw std::runtime_error("truncated PGM pixel data in " + path);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        img(r, c) = static_cast<double>(buf[static_cast<size_t>(r) * w + c]);
  } else {
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        int v = parse_pgm_int(in, "pixel");
        if (v < 0 || v > maxval)
          throw std::runtime_error("PGM pixel out of range in " + path);
        img(r, c) = static_cast<double>(v);
      }
  }
  return img;
}

void write_pgm(const GrayImage& img, const std::string& path) {
  if (img.rows() < 1 || img.cols() < 1)
    throw std::invalid_argument("write_pgm: empty image");
  std::ostringstream os;
  os << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  std::string payload = os.str();
  payload.reserve(payload.size() + static_cast<size_t>(img.size()));
  for (Eigen::Index r = 0; r < img.rows(); ++r)
    for (Eigen::Index c = 0; c < img.cols(); ++c) {
      long v = std::lround(std::clamp(img(r, c), 0.0, 255.0));
      payload.push_back(static_cast<char>(static_cast<unsigned char>(v)));
    }
  write_file_atomic(path, payload);
}

GrayImage add_gaussian_noise(const GrayImage& img, double sigma,
                             std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("add_gaussian_noise: sigma must be >= 0");
  if (sigma == 0.0) return img;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  GrayImage out = img;
  for (Eigen::Index c = 0; c < out.cols(); ++c)
    for (Eigen::Index r = 0; r < out.rows(); ++r) out(r, c) += noise(rng);
  return out;
}

static std::vector<int> origin_positions(int extent, int patch_size, int stride) {
  std::vector<int> v;
  for (int o = 0; o + patch_size <= extent; o += stride) v.push_back(o);
  if (v.back() != extent - patch_size) v.push_back(extent - patch_size);
  return v;
}

PatchGrid extract_patches(const GrayImage& img, int patch_size, int stride) {
  if (patch_size < 1) throw std::invalid_argument("extract_patches: bad patch size");
  if (stride < 1 || stride > patch_size)
    throw std::invalid_argument("extract_patches: stride must be in [1, patch_size]");
  if (img.rows() < patch_size || img.cols() < patch_size)
    throw std::invalid_argument("extract_patches: image smaller than patch");

  PatchGrid grid;
  grid.patch_size = patch_size;
  grid.stride = stride;
  grid.image_rows = static_cast<int>(img.rows());
  grid.image_cols = static_cast<int>(img.cols());
  std::vector<int> row_origins = origin_positions(grid.image_rows, patch_size, stride);
  std::vector<int> col_origins = origin_positions(grid.image_cols, patch_size, stride);

  const int m = patch_size * patch_size;
  const size_t n = row_origins.size() * col_origins.size();
  grid.patches.resize(m, static_cast<Eigen::Index>(n));
  grid.means.resize(static_cast<Eigen::Index>(n));
  grid.origins.reserve(n);

  Eigen::Index idx = 0;
  for (int oc : col_origins)
    for (int orow : row_origins) {
      Eigen::VectorXd v(m);
      for (int c = 0; c < patch_size; ++c)
        for (int r = 0; r < patch_size; ++r)
          v[c * patch_size + r] = img(orow + r, oc + c);
      double mean = v.mean();
      grid.means[idx] = mean;
      grid.patches.col(idx) = v.array() - mean;
      grid.origins.emplace_back(orow, oc);
      ++idx;
    }
  return grid;
}

GrayImage reconstruct_image(const PatchGrid& grid,
                            const Eigen::MatrixXd& patches_hat, int rows,
                            int cols, bool clamp) {
  const int ps = grid.patch_size;
  if (patches_hat.rows() != ps * ps ||
      patches_hat.cols() != static_cast<Eigen::Index>(grid.origins.size()))
    throw std::invalid_argument("reconstruct_image: patch matrix shape mismatch");
  if (rows != grid.image_rows || cols != grid.image_cols)
    throw std::invalid_argument("reconstruct_image: image shape mismatch");

  Eigen::MatrixXd accum = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::MatrixXd cover = Eigen::MatrixXd::Zero(rows, cols);
  for (size_t nidx = 0; nidx < grid.origins.size(); ++nidx) {
    auto [orow, oc] = grid.origins[nidx];
    double mean = grid.means[static_cast<Eigen::Index>(nidx)];
    for (int c = 0; c < ps; ++c)
      for (int r = 0; r < ps; ++r) {
        accum(orow + r, oc + c) +=
            patches_hat(c * ps + r, static_cast<Eigen::Index>(nidx)) + mean;
        cover(orow + r, oc + c) += 1.0;
      }
  }
  if ((cover.array() == 0.0).any())
    throw std::runtime_error("reconstruct_image: uncovered pixels");
  GrayImage out = accum.array() / cover.array();
  if (clamp) out = out.cwiseMax(0.0).cwiseMin(255.0);
  return out;
}

double psnr_image(const GrayImage& clean, const GrayImage& recon) {
  if (clean.rows() != recon.rows() || clean.cols() != recon.cols())
    throw std::invalid_argument("psnr_image: shape mismatch");
  double mse = (clean - recon).squaredNorm() / static_cast<double>(clean.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

DenoiseResult denoise(const GrayImage& noisy, double sigma,
                      const LearnConfig& cfg, const DenoiseConfig& dcfg) {
  cfg.validate();
  if (!(sigma >= 0.0)) throw std::invalid_argument("denoise: sigma must be >= 0");
  PatchGrid grid = extract_patches(noisy, dcfg.patch_size, 1);
  const Eigen::Index n = grid.patches.cols();

  Eigen::MatrixXd training;
  if (dcfg.train_subsample > 0 && dcfg.train_subsample < n) {
    // uniform sample without replacement, deterministic in the learn seed
    std::vector<Eigen::Index> idx(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
    std::mt19937_64 rng(derive_seed(cfg.seed, 0x5eed));
    for (int i = 0; i < dcfg.train_subsample; ++i) {
      std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
      std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(pick(rng))]);
    }
    training.resize(grid.patches.rows(), dcfg.train_subsample);
    for (int i = 0; i < dcfg.train_subsample; ++i)
      training.col(i) = grid.patches.col(idx[static_cast<size_t>(i)]);
  } else {
    training = grid.patches;
  }

  Dictionary d0 = init_redundant_dct(dcfg.patch_size, cfg.p0);
  DenoiseResult res;
  res.report = learn_with_init(training, d0, cfg);
  if (res.report.aborted_empty)
    throw std::runtime_error("denoise: dictionary collapsed to zero atoms");

  const double eps0 =
      dcfg.epsilon0 > 0.0 ? dcfg.epsilon0 : derive_epsilon0(sigma, dcfg.tau, dcfg.patch_size);
  const Eigen::MatrixXd& dict = res.report.dictionary.atoms;
  Eigen::MatrixXd patches_hat(grid.patches.rows(), n);
  parallel_for(static_cast<int>(n), cfg.threads, [&](int j) {
    OmpResult omp = omp_error(dict, grid.patches.col(j), eps0);
    patches_hat.col(j) = dict * omp.alpha;
  });

  res.image = reconstruct_image(grid, patches_hat, grid.image_rows, grid.image_cols, true);
  return res;
}

}  // namespace gscad
