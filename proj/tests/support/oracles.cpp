// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <cmath>
#include <cstddef>

namespace birdssl::oracle {
namespace {

std::vector<double> unit(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / s;
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Rows standardize(const Rows& z) {
  const std::size_t n = z.size(), d = z[0].size();
  Rows out = z;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += z[i][j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (z[i][j] - mean) * (z[i][j] - mean);
    var /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) out[i][j] = (z[i][j] - mean) / std::sqrt(var);
  }
  return out;
}

Rows center_and_scale(const Rows& z) {
  const std::size_t n = z.size(), d = z[0].size();
  Rows out = z;
  if (n > 1) {
    for (std::size_t j = 0; j < d; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += z[i][j];
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) out[i][j] = z[i][j] - mean;
    }
  }
  double fro = 0.0;
  for (const auto& row : out) fro += dot(row, row);
  fro = std::sqrt(fro);
  for (auto& row : out) {
    for (double& x : row) x /= fro;
  }
  return out;
}

}  // namespace

double simclr(const Rows& z1, const Rows& z2, double tau) {
  const std::size_t n = z1.size();
  Rows u;
  for (const auto& r : z1) u.push_back(unit(r));
  for (const auto& r : z2) u.push_back(unit(r));
  double total = 0.0;
  for (std::size_t a = 0; a < 2 * n; ++a) {
    const std::size_t p = a < n ? a + n : a - n;
    double denom = 0.0;
    for (std::size_t k = 0; k < 2 * n; ++k) {
      if (k != a) denom += std::exp(dot(u[a], u[k]) / tau);
    }
    total += -std::log(std::exp(dot(u[a], u[p]) / tau) / denom);
  }
  return total / static_cast<double>(2 * n);
}

double barlow_twins(const Rows& z1, const Rows& z2, double lambda) {
  const Rows a = standardize(z1), b = standardize(z2);
  const std::size_t n = a.size(), d = a[0].size();
  double loss = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double c = 0.0;
      for (std::size_t k = 0; k < n; ++k) c += a[k][i] * b[k][j];
      c /= static_cast<double>(n);
      loss += i == j ? (1.0 - c) * (1.0 - c) : lambda * c * c;
    }
  }
  return loss;
}

double frossl(const Rows& z1, const Rows& z2, double lambda) {
  const Rows y1 = center_and_scale(z1), y2 = center_and_scale(z2);
  const std::size_t n = y1.size(), d = y1[0].size();
  double mse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) mse += (y1[i][j] - y2[i][j]) * (y1[i][j] - y2[i][j]);
  }
  mse /= static_cast<double>(n);
  return mse + lambda * (std::log(feature_gram_sq(y1)) + std::log(feature_gram_sq(y2)));
}

double supcon(const Rows& z, const std::vector<int>& labels, double tau) {
  const std::size_t m = z.size();
  Rows u;
  for (const auto& r : z) u.push_back(unit(r));
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double denom = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      if (a != i) denom += std::exp(dot(u[i], u[a]) / tau);
    }
    double sum = 0.0;
    int positives = 0;
    for (std::size_t p = 0; p < m; ++p) {
      if (p == i || labels[p] != labels[i]) continue;
      sum += std::log(std::exp(dot(u[i], u[p]) / tau) / denom);
      ++positives;
    }
    total += -sum / positives;
  }
  return total / static_cast<double>(m);
}

double feature_gram_sq(const Rows& z) {
  const std::size_t n = z.size(), d = z[0].size();
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double g = 0.0;
      for (std::size_t k = 0; k < n; ++k) g += z[k][i] * z[k][j];
      s += g * g;
    }
  }
  return s;
}

double sample_gram_sq(const Rows& z) {
  const std::size_t n = z.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double g = dot(z[i], z[j]);
      s += g * g;
    }
  }
  return s;
}

void ScalarAdamW::update(double grad, double lr, double wd, double b1, double b2, double eps) {
  ++step;
  m = b1 * m + (1.0 - b1) * grad;
  v = b2 * v + (1.0 - b2) * grad * grad;
  const double m_hat = m / (1.0 - std::pow(b1, step));
  const double v_hat = v / (1.0 - std::pow(b2, step));
  value -= lr * (m_hat / (std::sqrt(v_hat) + eps) + wd * value);
}

double htk_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double htk_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

long frame_count(long len, long n_fft, long hop) { return 1 + (len - n_fft) / hop; }

double ci95(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return 1.96 * std::sqrt(ss / static_cast<double>(xs.size() - 1)) /
         std::sqrt(static_cast<double>(xs.size()));
}

}  // namespace birdssl::oracle
