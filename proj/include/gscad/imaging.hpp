// Grayscale image denoising: PGM I/O, overlapping patch extraction with mean
// removal, overlap-averaged reconstruction, PSNR, and the end-to-end pipeline
// that learns a dictionary on the noisy patches and codes them with
// error-constrained OMP.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gscad/coding.hpp"
#include "gscad/learner.hpp"

namespace gscad {

// Pixel values in [0, 255]; rows index image height.
using GrayImage = Eigen::MatrixXd;

GrayImage read_pgm(const std::string& path);   // P5 or P2, maxval <= 255
void write_pgm(const GrayImage& img, const std::string& path);  // binary P5

// Adds i.i.d. N(0, sigma^2) noise; sigma == 0 returns the input unchanged.
GrayImage add_gaussian_noise(const GrayImage& img, double sigma,
                             std::uint64_t seed);

struct PatchGrid {
  Eigen::MatrixXd patches;  // (patch_size^2) x N, column-major pixels, mean removed
  Eigen::VectorXd means;
  std::vector<std::pair<int, int>> origins;  // (row, col) of each patch
  int patch_size = 0;
  int stride = 1;
  int image_rows = 0;
  int image_cols = 0;
};

// Origins run column-major over the stride grid; when the stride grid misses
// the last row/column of valid origins, the flush-to-boundary origin is
// appended so every pixel is covered.
PatchGrid extract_patches(const GrayImage& img, int patch_size, int stride = 1);

// Scatter-adds mean-restored patches and divides by the per-pixel cover
// count. clamp restricts the result to [0, 255].
GrayImage reconstruct_image(const PatchGrid& grid,
                            const Eigen::MatrixXd& patches_hat, int rows,
                            int cols, bool clamp = true);

// 10*log10(255^2 / MSE); +inf for identical images.
double psnr_image(const GrayImage& clean, const GrayImage& recon);

struct DenoiseResult {
  GrayImage image;
  LearnReport report;
};

// Learns a dictionary on (optionally subsampled) noisy patches starting from
// the redundant DCT, then codes every patch with omp_error at budget
// epsilon0 = sigma^2 * F_m^{-1}(tau) and reassembles by overlap averaging.
DenoiseResult denoise(const GrayImage& noisy, double sigma,
                      const LearnConfig& cfg, const DenoiseConfig& dcfg);

}  // namespace gscad
