// Small shared helpers: seeding, thread pool-free parallel loops, atomic file
// writes, CSV matrix round trips.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gscad {

// splitmix64 mixer; decorrelates derived seeds from a master seed.
std::uint64_t splitmix64(std::uint64_t x);

// Deterministic per-stream seed derivation (stream 0, 1, ... are independent).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// Runs fn(i) for i in [0, n). Work is split into contiguous blocks, one per
// thread; fn must only touch state owned by index i.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

// Writes content to path via a temp file in the same directory + rename, so
// readers never observe a partial file. Binary-safe.
void write_file_atomic(const std::string& path, const std::string& content);

// Comma-separated numeric matrix, 17 significant digits, no header.
std::string matrix_to_csv(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_csv_file(const std::string& path);

// Formats a double with enough digits to round-trip.
std::string format_double(double v);

}  // namespace gscad
