// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "birdssl/audio.hpp"

namespace birdssl {

enum class Activation { kRelu, kTanh, kSoftplus };

std::string_view to_string(Activation activation);
Activation parse_activation(std::string_view name);

struct ConvStage {
  int out_channels = 16;
  int kernel = 3;
  int stride = 2;

  friend bool operator==(const ConvStage&, const ConvStage&) = default;
};

/// Conv stages (zero "same" padding, kernel/2 on each side) -> global
/// average pool -> linear embedding of size `embedding_dim` -> optional
/// projector MLP. Each conv stage and each hidden projector layer is
/// followed by the activation.
struct EncoderConfig {
  std::vector<ConvStage> stages = {{16, 3, 2}, {32, 3, 2}, {64, 3, 2}};
  int embedding_dim = 64;
  std::vector<int> projector_dims = {64, 64};
  Activation activation = Activation::kRelu;
  /// Per-example zero-mean / unit-variance scaling of the input spectrogram.
  bool standardize_input = true;

  void validate() const;

  /// Canonical `key=value` lines, sorted by key.
  std::string to_text() const;
  static EncoderConfig from_text(std::string_view text);

  /// Output size of the network head the objectives see.
  int output_dim() const {
    return projector_dims.empty() ? embedding_dim : projector_dims.back();
  }

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  std::size_t size() const noexcept { return data.size(); }
  static Tensor zeros(std::vector<int> shape);
};

/// Parameter tensors in declaration order. `version` changes whenever the
/// values are updated, which lets backward() reject caches from an older
/// forward pass.
template <typename T>
struct Parameters {
  std::vector<Tensor<T>> tensors;
  std::uint64_t version = 0;

  std::size_t scalar_count() const;
};

/// Parameter values plus AdamW moment estimates.
template <typename T>
struct ParameterState {
  Parameters<T> values;
  std::vector<Tensor<T>> first_moment;
  std::vector<Tensor<T>> second_moment;
  std::uint64_t step = 0;

  static ParameterState from(Parameters<T> values);
};

struct AdamWConfig {
  double learning_rate = 1e-3;
  double weight_decay = 1e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Decoupled weight decay:
///   value <- value - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * value)
/// Throws kNonFinite on a non-finite gradient (state left untouched).
template <typename T>
void adamw_step(ParameterState<T>& state, std::span<const Tensor<T>> grads,
                const AdamWConfig& cfg);

template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
class Encoder {
 public:
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Vector<T>;

  /// Intermediates of one forward pass, consumed by backward().
  struct Cache {
    std::uint64_t params_version = 0;
    bool valid = false;
    bool used_projector = false;
    std::vector<int> heights, widths;  // spatial extent of each stage input
    std::vector<Mat> stage_inputs;      // channels x (H*W)
    std::vector<Mat> stage_pre;         // pre-activation outputs
    Vec pooled;
    Vec embedding;
    std::vector<Vec> proj_inputs;
    std::vector<Vec> proj_pre;
  };

  struct Output {
    Vec embedding;  // backbone embedding (few-shot evaluation)
    Vec head;       // projector output, or the embedding when no projector is used
  };

  explicit Encoder(EncoderConfig cfg);

  const EncoderConfig& config() const noexcept { return cfg_; }

  /// Zero tensors in declaration order:
  ///   per stage: weight (out, kh, kw, in), bias (out)
  ///   embedding: weight (D, C_last), bias (D)
  ///   per projector layer: weight (out, in), bias (out)
  Parameters<T> zero_parameters() const;
  /// He/Xavier-scaled normal weights, zero biases, deterministic per seed.
  Parameters<T> init_parameters(std::uint64_t seed) const;

  Output forward(const MelSpectrogram& spec, const Parameters<T>& params,
                 Cache* cache = nullptr, bool use_projector = true) const;

  /// Accumulates d(grad_head . head)/d(params) into `grads`. `grad_head`
  /// is taken w.r.t. the head the cached forward produced.
  void backward(const Vec& grad_head, const Cache& cache, const Parameters<T>& params,
                std::vector<Tensor<T>>& grads) const;

 private:
  EncoderConfig cfg_;
};

extern template struct Parameters<float>;
extern template struct Parameters<double>;
extern template class Encoder<float>;
extern template class Encoder<double>;

}  // namespace birdssl
