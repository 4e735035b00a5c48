// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "birdssl/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "birdssl/error.hpp"
#include "birdssl/kv_text.hpp"
#include "birdssl/random.hpp"

namespace birdssl {

std::string_view to_string(Activation activation) {
  switch (activation) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSoftplus: return "softplus";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "softplus") return Activation::kSoftplus;
  fail(Errc::kConfig, "unknown activation '" + std::string(name) + "' (relu|tanh|softplus)");
}

// ---------------------------------------------------------------------------
// EncoderConfig

void EncoderConfig::validate() const {
  require(!stages.empty(), Errc::kConfig, "encoder: at least one conv stage is required");
  for (const auto& s : stages) {
    require(s.out_channels >= 1 && s.kernel >= 1 && s.stride >= 1, Errc::kConfig,
            "encoder: conv stage fields must be positive");
  }
  require(embedding_dim >= 2, Errc::kConfig, "encoder: embedding_dim must be >= 2");
  for (int d : projector_dims) {
    require(d >= 1, Errc::kConfig, "encoder: projector dims must be positive");
  }
}

std::string EncoderConfig::to_text() const {
  KeyValues kv;
  kv["activation"] = std::string(to_string(activation));
  kv["embedding_dim"] = std::to_string(embedding_dim);
  std::string dims;
  for (std::size_t i = 0; i < projector_dims.size(); ++i) {
    dims += (i ? "," : "") + std::to_string(projector_dims[i]);
  }
  kv["projector_dims"] = dims;
  std::string st;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    st += (i ? "," : "") + std::to_string(stages[i].out_channels) + ":" +
          std::to_string(stages[i].kernel) + ":" + std::to_string(stages[i].stride);
  }
  kv["stages"] = st;
  kv["standardize_input"] = standardize_input ? "1" : "0";
  return format_key_values(kv);
}

EncoderConfig EncoderConfig::from_text(std::string_view text) {
  const KeyValues kv = parse_key_values(text, "encoder config");
  EncoderConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "activation") {
      cfg.activation = parse_activation(value);
    } else if (key == "embedding_dim") {
      cfg.embedding_dim = parse_int(key, value);
    } else if (key == "projector_dims") {
      cfg.projector_dims = parse_int_list(key, value);
    } else if (key == "standardize_input") {
      cfg.standardize_input = parse_bool(key, value);
    } else if (key == "stages") {
      cfg.stages.clear();
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        std::replace(item.begin(), item.end(), ':', ',');
        const auto parts = parse_int_list(key, item);
        require(parts.size() == 3, Errc::kConfig,
                "encoder: stage must be out_channels:kernel:stride, got '" + item + "'");
        cfg.stages.push_back({parts[0], parts[1], parts[2]});
      }
    } else {
      fail(Errc::kConfig, "encoder: unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Tensors and optimizer

template <typename T>
Tensor<T> Tensor<T>::zeros(std::vector<int> shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return Tensor<T>{std::move(shape), std::vector<T>(n, T(0))};
}

template <typename T>
std::size_t Parameters<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.size();
  return n;
}

template <typename T>
ParameterState<T> ParameterState<T>::from(Parameters<T> values) {
  ParameterState<T> state;
  for (const auto& t : values.tensors) {
    state.first_moment.push_back(Tensor<T>::zeros(t.shape));
    state.second_moment.push_back(Tensor<T>::zeros(t.shape));
  }
  state.values = std::move(values);
  return state;
}

template <typename T>
void adamw_step(ParameterState<T>& state, std::span<const Tensor<T>> grads,
                const AdamWConfig& cfg) {
  auto& values = state.values.tensors;
  require(grads.size() == values.size() && state.first_moment.size() == values.size() &&
              state.second_moment.size() == values.size(),
          Errc::kShapeMismatch, "adamw: tensor count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(grads[i].size() == values[i].size() &&
                state.first_moment[i].size() == values[i].size() &&
                state.second_moment[i].size() == values[i].size(),
            Errc::kShapeMismatch, "adamw: tensor " + std::to_string(i) + " shape mismatch");
    for (T g : grads[i].data) {
      require(std::isfinite(static_cast<double>(g)), Errc::kNonFinite,
              "adamw: non-finite gradient in tensor " + std::to_string(i));
    }
  }

  const std::uint64_t t = state.step + 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto& v = values[i].data;
    auto& m1 = state.first_moment[i].data;
    auto& m2 = state.second_moment[i].data;
    const auto& g = grads[i].data;
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double gj = g[j];
      const double m = cfg.beta1 * m1[j] + (1.0 - cfg.beta1) * gj;
      const double s = cfg.beta2 * m2[j] + (1.0 - cfg.beta2) * gj * gj;
      m1[j] = static_cast<T>(m);
      m2[j] = static_cast<T>(s);
      const double m_hat = m / bc1;
      const double v_hat = s / bc2;
      const double value = v[j];
      v[j] = static_cast<T>(
          value - cfg.learning_rate *
                      (m_hat / (std::sqrt(v_hat) + cfg.epsilon) + cfg.weight_decay * value));
    }
  }
  state.step = t;
  ++state.values.version;
}

// ---------------------------------------------------------------------------
// Encoder

namespace {

template <typename T>
T activate(Activation a, T x) {
  switch (a) {
    case Activation::kRelu: return x > T(0) ? x : T(0);
    case Activation::kTanh: return std::tanh(x);
    case Activation::kSoftplus: return x > T(20) ? x : std::log1p(std::exp(x));
  }
  return x;
}

template <typename T>
T activate_grad(Activation a, T pre) {
  switch (a) {
    case Activation::kRelu: return pre > T(0) ? T(1) : T(0);
    case Activation::kTanh: {
      const T y = std::tanh(pre);
      return T(1) - y * y;
    }
    case Activation::kSoftplus: return T(1) / (T(1) + std::exp(-pre));
  }
  return T(1);
}

int conv_out(int in, int kernel, int stride) {
  const int pad = kernel / 2;
  return (in + 2 * pad - kernel) / stride + 1;
}

// Column p = oh * w_out + ow; row (kh * k + kw) * channels + c.
template <typename M>
M im2col(const M& x, int channels, int h, int w, int k, int stride) {
  const int pad = k / 2;
  const int h_out = conv_out(h, k, stride), w_out = conv_out(w, k, stride);
  M cols = M::Zero(static_cast<Eigen::Index>(k) * k * channels,
                   static_cast<Eigen::Index>(h_out) * w_out);
  for (int oh = 0; oh < h_out; ++oh) {
    for (int ow = 0; ow < w_out; ++ow) {
      const Eigen::Index p = static_cast<Eigen::Index>(oh) * w_out + ow;
      for (int kh = 0; kh < k; ++kh) {
        const int ih = oh * stride - pad + kh;
        if (ih < 0 || ih >= h) continue;
        for (int kw = 0; kw < k; ++kw) {
          const int iw = ow * stride - pad + kw;
          if (iw < 0 || iw >= w) continue;
          const Eigen::Index row0 = (static_cast<Eigen::Index>(kh) * k + kw) * channels;
          cols.col(p).segment(row0, channels) =
              x.col(static_cast<Eigen::Index>(ih) * w + iw);
        }
      }
    }
  }
  return cols;
}

template <typename M>
M col2im(const M& cols, int channels, int h, int w, int k, int stride) {
  const int pad = k / 2;
  const int h_out = conv_out(h, k, stride), w_out = conv_out(w, k, stride);
  M x = M::Zero(channels, static_cast<Eigen::Index>(h) * w);
  for (int oh = 0; oh < h_out; ++oh) {
    for (int ow = 0; ow < w_out; ++ow) {
      const Eigen::Index p = static_cast<Eigen::Index>(oh) * w_out + ow;
      for (int kh = 0; kh < k; ++kh) {
        const int ih = oh * stride - pad + kh;
        if (ih < 0 || ih >= h) continue;
        for (int kw = 0; kw < k; ++kw) {
          const int iw = ow * stride - pad + kw;
          if (iw < 0 || iw >= w) continue;
          const Eigen::Index row0 = (static_cast<Eigen::Index>(kh) * k + kw) * channels;
          x.col(static_cast<Eigen::Index>(ih) * w + iw) += cols.col(p).segment(row0, channels);
        }
      }
    }
  }
  return x;
}

template <typename T>
using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using RowMajorMutMap =
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

struct Layout {
  std::size_t stage_weight(std::size_t s) const { return 2 * s; }
  std::size_t stage_bias(std::size_t s) const { return 2 * s + 1; }
  std::size_t embed_weight() const { return 2 * n_stages; }
  std::size_t embed_bias() const { return 2 * n_stages + 1; }
  std::size_t proj_weight(std::size_t l) const { return 2 * n_stages + 2 + 2 * l; }
  std::size_t proj_bias(std::size_t l) const { return 2 * n_stages + 3 + 2 * l; }
  std::size_t total(std::size_t n_proj) const { return 2 * n_stages + 2 + 2 * n_proj; }
  std::size_t n_stages;
};

}  // namespace

template <typename T>
Encoder<T>::Encoder(EncoderConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
}

template <typename T>
Parameters<T> Encoder<T>::zero_parameters() const {
  Parameters<T> p;
  int in = 1;
  for (const auto& s : cfg_.stages) {
    p.tensors.push_back(Tensor<T>::zeros({s.out_channels, s.kernel, s.kernel, in}));
    p.tensors.push_back(Tensor<T>::zeros({s.out_channels}));
    in = s.out_channels;
  }
  p.tensors.push_back(Tensor<T>::zeros({cfg_.embedding_dim, in}));
  p.tensors.push_back(Tensor<T>::zeros({cfg_.embedding_dim}));
  in = cfg_.embedding_dim;
  for (int d : cfg_.projector_dims) {
    p.tensors.push_back(Tensor<T>::zeros({d, in}));
    p.tensors.push_back(Tensor<T>::zeros({d}));
    in = d;
  }
  return p;
}

template <typename T>
Parameters<T> Encoder<T>::init_parameters(std::uint64_t seed) const {
  Parameters<T> p = zero_parameters();
  Rng rng = make_rng(seed, {0x1417});
  const double gain = cfg_.activation == Activation::kRelu ? 2.0 : 1.0;
  const Layout layout{cfg_.stages.size()};
  auto fill = [&](Tensor<T>& w, double variance_gain) {
    const int fan_in = static_cast<int>(w.size() / static_cast<std::size_t>(w.shape[0]));
    std::normal_distribution<double> normal(0.0, std::sqrt(variance_gain / fan_in));
    for (T& v : w.data) v = static_cast<T>(normal(rng));
  };
  for (std::size_t s = 0; s < cfg_.stages.size(); ++s) fill(p.tensors[layout.stage_weight(s)], gain);
  fill(p.tensors[layout.embed_weight()], 1.0);
  for (std::size_t l = 0; l < cfg_.projector_dims.size(); ++l) {
    const bool hidden = l + 1 < cfg_.projector_dims.size();
    fill(p.tensors[layout.proj_weight(l)], hidden ? gain : 1.0);
  }
  return p;
}

template <typename T>
typename Encoder<T>::Output Encoder<T>::forward(const MelSpectrogram& spec,
                                                const Parameters<T>& params, Cache* cache,
                                                bool use_projector) const {
  const Layout layout{cfg_.stages.size()};
  require(params.tensors.size() == layout.total(cfg_.projector_dims.size()),
          Errc::kShapeMismatch, "encoder: parameter count does not match config");
  require(spec.n_mels() >= 1 && spec.n_frames() >= 1, Errc::kShapeMismatch,
          "encoder: empty spectrogram");

  int h = spec.n_mels(), w = spec.n_frames();
  Mat x(1, static_cast<Eigen::Index>(h) * w);
  {
    const auto& v = spec.values();
    double mean = 0.0, var = 0.0;
    if (cfg_.standardize_input) {
      for (float e : v) mean += e;
      mean /= static_cast<double>(v.size());
      for (float e : v) var += (e - mean) * (e - mean);
      var /= static_cast<double>(v.size());
    }
    const double sd = var > 1e-16 ? std::sqrt(var) : 1.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      x(0, static_cast<Eigen::Index>(i)) = static_cast<T>((v[i] - mean) / sd);
    }
  }

  if (cache) {
    *cache = Cache{};
    cache->params_version = params.version;
  }
  int channels = 1;
  for (std::size_t s = 0; s < cfg_.stages.size(); ++s) {
    const ConvStage& st = cfg_.stages[s];
    const Tensor<T>& wt = params.tensors[layout.stage_weight(s)];
    const Tensor<T>& bt = params.tensors[layout.stage_bias(s)];
    const RowMajorMap<T> wm(wt.data.data(), st.out_channels,
                            static_cast<Eigen::Index>(st.kernel) * st.kernel * channels);
    const Eigen::Map<const Vec> b(bt.data.data(), st.out_channels);
    const Mat cols = im2col(x, channels, h, w, st.kernel, st.stride);
    Mat pre = wm * cols;
    pre.colwise() += b;
    if (cache) {
      cache->heights.push_back(h);
      cache->widths.push_back(w);
      cache->stage_inputs.push_back(std::move(x));
      cache->stage_pre.push_back(pre);
    }
    x = pre.unaryExpr([a = cfg_.activation](T v) { return activate(a, v); });
    h = conv_out(h, st.kernel, st.stride);
    w = conv_out(w, st.kernel, st.stride);
    channels = st.out_channels;
  }

  const Vec pooled = x.rowwise().mean();
  const Tensor<T>& we = params.tensors[layout.embed_weight()];
  const RowMajorMap<T> wem(we.data.data(), cfg_.embedding_dim, channels);
  const Eigen::Map<const Vec> be(params.tensors[layout.embed_bias()].data.data(),
                                 cfg_.embedding_dim);
  Output out;
  out.embedding = wem * pooled + be;
  if (cache) {
    cache->pooled = pooled;
    cache->embedding = out.embedding;
  }

  const bool project = use_projector && !cfg_.projector_dims.empty();
  Vec a = out.embedding;
  if (project) {
    int in = cfg_.embedding_dim;
    for (std::size_t l = 0; l < cfg_.projector_dims.size(); ++l) {
      const int d = cfg_.projector_dims[l];
      const RowMajorMap<T> wl(params.tensors[layout.proj_weight(l)].data.data(), d, in);
      const Eigen::Map<const Vec> bl(params.tensors[layout.proj_bias(l)].data.data(), d);
      Vec pre = wl * a + bl;
      if (cache) {
        cache->proj_inputs.push_back(a);
        cache->proj_pre.push_back(pre);
      }
      const bool hidden = l + 1 < cfg_.projector_dims.size();
      a = hidden ? Vec(pre.unaryExpr([act = cfg_.activation](T v) { return activate(act, v); }))
                 : pre;
      in = d;
    }
  }
  out.head = a;
  if (cache) {
    cache->used_projector = project;
    cache->valid = true;
  }
  return out;
}

template <typename T>
void Encoder<T>::backward(const Vec& grad_head, const Cache& cache, const Parameters<T>& params,
                          std::vector<Tensor<T>>& grads) const {
  const Layout layout{cfg_.stages.size()};
  require(cache.valid && cache.params_version == params.version, Errc::kStaleCache,
          "encoder: cache does not belong to the current parameters");
  if (grads.empty()) {
    for (const auto& t : params.tensors) grads.push_back(Tensor<T>::zeros(t.shape));
  }
  require(grads.size() == params.tensors.size(), Errc::kShapeMismatch,
          "encoder: gradient buffer does not match parameters");

  const Activation act = cfg_.activation;
  Vec grad_embedding;
  if (cache.used_projector) {
    require(grad_head.size() == cfg_.projector_dims.back(), Errc::kShapeMismatch,
            "encoder: gradient size does not match projector output");
    Vec dh = grad_head;
    for (std::size_t li = cfg_.projector_dims.size(); li-- > 0;) {
      const int d = cfg_.projector_dims[li];
      const int in = li == 0 ? cfg_.embedding_dim : cfg_.projector_dims[li - 1];
      RowMajorMutMap<T> gw(grads[layout.proj_weight(li)].data.data(), d, in);
      Eigen::Map<Vec> gb(grads[layout.proj_bias(li)].data.data(), d);
      gw.noalias() += dh * cache.proj_inputs[li].transpose();
      gb += dh;
      const RowMajorMap<T> wl(params.tensors[layout.proj_weight(li)].data.data(), d, in);
      Vec da = wl.transpose() * dh;
      if (li > 0) {
        const Vec& pre = cache.proj_pre[li - 1];
        for (Eigen::Index i = 0; i < da.size(); ++i) da(i) *= activate_grad(act, pre(i));
      }
      dh = std::move(da);
    }
    grad_embedding = std::move(dh);
  } else {
    require(grad_head.size() == cfg_.embedding_dim, Errc::kShapeMismatch,
            "encoder: gradient size does not match embedding");
    grad_embedding = grad_head;
  }

  const int c_last = cfg_.stages.back().out_channels;
  {
    RowMajorMutMap<T> gw(grads[layout.embed_weight()].data.data(), cfg_.embedding_dim, c_last);
    Eigen::Map<Vec> gb(grads[layout.embed_bias()].data.data(), cfg_.embedding_dim);
    gw.noalias() += grad_embedding * cache.pooled.transpose();
    gb += grad_embedding;
  }
  const RowMajorMap<T> wem(params.tensors[layout.embed_weight()].data.data(),
                           cfg_.embedding_dim, c_last);
  const Vec grad_pooled = wem.transpose() * grad_embedding;

  const Mat& last_pre = cache.stage_pre.back();
  Mat grad_act = (grad_pooled / static_cast<T>(last_pre.cols())).replicate(1, last_pre.cols());

  for (std::size_t s = cfg_.stages.size(); s-- > 0;) {
    const ConvStage& st = cfg_.stages[s];
    const int in_ch = s == 0 ? 1 : cfg_.stages[s - 1].out_channels;
    const int h = cache.heights[s], w = cache.widths[s];
    const Mat& pre = cache.stage_pre[s];
    Mat grad_pre = grad_act.binaryExpr(pre, [act](T g, T p) { return g * activate_grad(act, p); });

    const Mat cols = im2col(cache.stage_inputs[s], in_ch, h, w, st.kernel, st.stride);
    const Eigen::Index k_rows = static_cast<Eigen::Index>(st.kernel) * st.kernel * in_ch;
    RowMajorMutMap<T> gw(grads[layout.stage_weight(s)].data.data(), st.out_channels, k_rows);
    Eigen::Map<Vec> gb(grads[layout.stage_bias(s)].data.data(), st.out_channels);
    gw.noalias() += grad_pre * cols.transpose();
    gb += grad_pre.rowwise().sum();
    if (s == 0) break;

    const RowMajorMap<T> wm(params.tensors[layout.stage_weight(s)].data.data(), st.out_channels,
                            k_rows);
    const Mat grad_cols = wm.transpose() * grad_pre;
    grad_act = col2im(grad_cols, in_ch, h, w, st.kernel, st.stride);
  }
}

template struct Tensor<float>;
template struct Tensor<double>;
template struct Parameters<float>;
template struct Parameters<double>;
template struct ParameterState<float>;
template struct ParameterState<double>;
template void adamw_step<float>(ParameterState<float>&, std::span<const Tensor<float>>,
                                const AdamWConfig&);
template void adamw_step<double>(ParameterState<double>&, std::span<const Tensor<double>>,
                                 const AdamWConfig&);
template class Encoder<float>;
template class Encoder<double>;

}  // namespace birdssl
