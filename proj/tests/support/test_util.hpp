// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Core>

#include "birdssl/audio.hpp"
#include "birdssl/random.hpp"
#include "oracles.hpp"

namespace birdssl::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("birdssl_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

inline oracle::Rows to_rows(const Eigen::MatrixXd& m) {
  oracle::Rows rows(static_cast<std::size_t>(m.rows()),
                    std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    }
  }
  return rows;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max(1e-300, std::max(std::abs(a), std::abs(b)));
}

inline AudioClip sine(double hz, double seconds, int rate = 16000, double amp = 0.5) {
  AudioClip c;
  c.sample_rate_hz = rate;
  c.samples.resize(static_cast<std::size_t>(std::lround(seconds * rate)));
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    c.samples[i] = static_cast<float>(amp * std::sin(2.0 * std::numbers::pi * hz *
                                                     static_cast<double>(i) / rate));
  }
  return c;
}

inline AudioClip noise_clip(std::size_t n, Rng& rng, int rate = 16000, double amp = 0.3) {
  std::uniform_real_distribution<double> u(-amp, amp);
  AudioClip c;
  c.sample_rate_hz = rate;
  c.samples.resize(n);
  for (auto& s : c.samples) s = static_cast<float>(u(rng));
  return c;
}

inline MelSpectrogram random_spec(int f, int t, Rng& rng) {
  std::normal_distribution<double> normal(-3.0, 2.0);
  MelSpectrogram s(f, t);
  for (auto& v : s.values()) v = static_cast<float>(normal(rng));
  return s;
}

}  // namespace birdssl::testing
