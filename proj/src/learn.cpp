// SPDX-License-Identifier: Apache-2.0
//
// sitefb: site-specific limited-feedback beamforming simulation library
// Copyright (C) 2026 The sitefb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "sitefb/learn.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>

#include "sitefb/binio.hpp"
#include "sitefb/parallel.hpp"

namespace sitefb {

namespace {

constexpr std::string_view kCheckpointMagic = "BLML1";
constexpr std::uint8_t kCheckpointVersion = 1;

// Gradient accumulation is split into this many fixed chunks per mini-batch
// so the floating-point reduction order never depends on the worker count.
constexpr std::size_t kGradChunks = 8;

struct MlpTape {
  std::vector<RVec>* layer_in = nullptr;
  std::vector<RVec>* layer_xhat = nullptr;
  std::vector<RVec>* layer_y = nullptr;
  RVec* inv_std = nullptr;
};

RVec mlp_forward(const MlpModel& m, std::span<const double> input, MlpTape tape) {
  if (input.size() != static_cast<std::size_t>(m.k()))
    throw Error(ErrorCode::dimension_mismatch, "decode: fingerprint length differs from K");
  const auto& th = m.theta();
  RVec f(input.begin(), input.end());
  for (const auto& L : m.layers()) {
    RVec a(L.out);
    for (std::size_t o = 0; o < L.out; ++o) {
      const double* w = th.data() + L.weight + o * L.in;
      double acc = th[L.bias + o];
      for (std::size_t i = 0; i < L.in; ++i) acc += w[i] * f[i];
      a[o] = acc;
    }
    const double n = static_cast<double>(L.out);
    const double mean = std::accumulate(a.begin(), a.end(), 0.0) / n;
    double var = 0.0;
    for (double v : a) var += (v - mean) * (v - mean);
    var /= n;
    const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
    RVec xhat(L.out), y(L.out), next(L.out);
    for (std::size_t o = 0; o < L.out; ++o) {
      xhat[o] = (a[o] - mean) * inv_std;
      y[o] = th[L.ln_scale + o] * xhat[o] + th[L.ln_shift + o];
      next[o] = gelu(y[o]);
    }
    if (tape.layer_in) {
      tape.layer_in->push_back(std::move(f));
      tape.layer_xhat->push_back(std::move(xhat));
      tape.layer_y->push_back(std::move(y));
      tape.inv_std->push_back(inv_std);
    }
    f = std::move(next);
  }
  const std::size_t n_out = m.output_size();
  const std::size_t w_in = static_cast<std::size_t>(m.width());
  RVec out(n_out);
  for (std::size_t o = 0; o < n_out; ++o) {
    const double* w = th.data() + m.out_weight() + o * w_in;
    double acc = th[m.out_bias() + o];
    for (std::size_t i = 0; i < w_in; ++i) acc += w[i] * f[i];
    out[o] = acc;
  }
  if (tape.layer_in) tape.layer_in->push_back(std::move(f));  // input of the output layer
  for (double v : out)
    if (!std::isfinite(v)) throw Error(ErrorCode::numeric_failure, "decoder produced a non-finite activation");
  return out;
}

// Output vector layout: real parts then imaginary parts, each column-major
// (entry (i, j) at j * n_t + i).
CMat reshape_output(std::span<const double> out, int n_t, int q) {
  const auto n = static_cast<std::size_t>(n_t);
  const auto nq = n * static_cast<std::size_t>(q);
  CMat c(n, static_cast<std::size_t>(q));
  for (std::size_t j = 0; j < c.cols(); ++j)
    for (std::size_t i = 0; i < n; ++i) c(i, j) = cplx(out[j * n + i], out[nq + j * n + i]);
  return c;
}

struct RidgeCapture {
  RVec col_norm;
  CMat c_hat;
  CVec coef;
  CVec resid;
  double eta = 0.0;
};

RidgeCapture ridge_capture(const CMat& c_raw, std::span<const cplx> h, double ridge_eps) {
  if (c_raw.rows() != h.size()) throw Error(ErrorCode::dimension_mismatch, "subspace_loss: channel length differs from n_t");
  if (ridge_eps < 0.0) throw Error(ErrorCode::invalid_argument, "subspace_loss: negative ridge");
  require_nonzero_channel(h);
  RidgeCapture rc;
  rc.c_hat = c_raw;
  rc.col_norm.resize(c_raw.cols());
  for (std::size_t j = 0; j < c_raw.cols(); ++j) {
    double e = 0.0;
    for (std::size_t i = 0; i < c_raw.rows(); ++i) e += std::norm(c_raw(i, j));
    const double nrm = std::sqrt(e);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw Error(ErrorCode::numeric_failure, "decoded basis has a zero column");
    rc.col_norm[j] = nrm;
    for (std::size_t i = 0; i < c_raw.rows(); ++i) rc.c_hat(i, j) /= nrm;
  }
  rc.coef = least_squares(rc.c_hat, h, ridge_eps);
  const CVec fit = matmul(rc.c_hat, rc.coef);
  rc.resid = CVec(h.begin(), h.end()) - fit;
  rc.eta = dot(h, fit).real() / norm_sq(h);
  return rc;
}

void standardize(SampleForward& s) {
  const double k = static_cast<double>(s.r.size());
  s.r_mean = std::accumulate(s.r.begin(), s.r.end(), 0.0) / k;
  double var = 0.0;
  for (double v : s.r) var += (v - s.r_mean) * (v - s.r_mean);
  s.r_sd = std::sqrt(var / k);
  s.x = normalize_fingerprint(s.r);
}

void accumulate_sample(const MlpModel& m, const TrainableProbing& b, const SampleForward& s, double d_eta,
                       bool include_probing, Gradients& g) {
  if (d_eta == 0.0) return;
  const auto& th = m.theta();
  const std::size_t n = static_cast<std::size_t>(m.n_t());
  const std::size_t q = static_cast<std::size_t>(m.q());

  // d eta / d C_hat = 2 r coef^H / ||h||^2, then through column normalization.
  RVec d_out(m.output_size());
  for (std::size_t j = 0; j < q; ++j) {
    CVec gj(n);
    for (std::size_t i = 0; i < n; ++i) gj[i] = 2.0 * d_eta * s.resid[i] * std::conj(s.coef[j]) / s.h_energy;
    double radial = 0.0;
    for (std::size_t i = 0; i < n; ++i) radial += (std::conj(s.c_hat(i, j)) * gj[i]).real();
    for (std::size_t i = 0; i < n; ++i) {
      const cplx gc = (gj[i] - s.c_hat(i, j) * radial) / s.col_norm[j];
      d_out[j * n + i] = gc.real();
      d_out[n * q + j * n + i] = gc.imag();
    }
  }

  // Output layer.
  const std::size_t w_in = static_cast<std::size_t>(m.width());
  const RVec& f_last = s.layer_in.back();
  RVec df(w_in, 0.0);
  for (std::size_t o = 0; o < d_out.size(); ++o) {
    const double go = d_out[o];
    if (go == 0.0) continue;
    double* gw = g.theta.data() + m.out_weight() + o * w_in;
    const double* w = th.data() + m.out_weight() + o * w_in;
    for (std::size_t i = 0; i < w_in; ++i) {
      gw[i] += go * f_last[i];
      df[i] += go * w[i];
    }
    g.theta[m.out_bias() + o] += go;
  }

  // Hidden layers in reverse.
  for (std::size_t d = m.layers().size(); d-- > 0;) {
    const auto& L = m.layers()[d];
    const RVec& xhat = s.layer_xhat[d];
    const RVec& y = s.layer_y[d];
    const RVec& f_in = s.layer_in[d];
    RVec dxhat(L.out);
    for (std::size_t o = 0; o < L.out; ++o) {
      const double dy = df[o] * gelu_grad(y[o]);
      g.theta[L.ln_scale + o] += dy * xhat[o];
      g.theta[L.ln_shift + o] += dy;
      dxhat[o] = dy * th[L.ln_scale + o];
    }
    const double nn = static_cast<double>(L.out);
    double mean_d = 0.0, mean_dx = 0.0;
    for (std::size_t o = 0; o < L.out; ++o) {
      mean_d += dxhat[o];
      mean_dx += dxhat[o] * xhat[o];
    }
    mean_d /= nn;
    mean_dx /= nn;
    RVec df_in(L.in, 0.0);
    for (std::size_t o = 0; o < L.out; ++o) {
      const double da = s.layer_inv_std[d] * (dxhat[o] - mean_d - xhat[o] * mean_dx);
      double* gw = g.theta.data() + L.weight + o * L.in;
      const double* w = th.data() + L.weight + o * L.in;
      for (std::size_t i = 0; i < L.in; ++i) {
        gw[i] += da * f_in[i];
        df_in[i] += da * w[i];
      }
      g.theta[L.bias + o] += da;
    }
    df = std::move(df_in);
  }

  if (!include_probing) return;

  // Standardization backward.
  const std::size_t k = s.r.size();
  const double denom = s.r_sd + kFingerprintStdEps;
  const double mean_dx = std::accumulate(df.begin(), df.end(), 0.0) / static_cast<double>(k);
  double cross = 0.0;
  for (std::size_t i = 0; i < k; ++i) cross += df[i] * (s.r[i] - s.r_mean);
  RVec dr(k);
  for (std::size_t i = 0; i < k; ++i) {
    dr[i] = (df[i] - mean_dx) / denom;
    if (s.r_sd > 0.0) dr[i] -= cross / (denom * denom) * (s.r[i] - s.r_mean) / (static_cast<double>(k) * s.r_sd);
  }

  // dB encoder backward: d r0 / d p = 10 / (ln 10 p), d p / d b_k = 2 conj(s_k) h.
  for (std::size_t c = 0; c < k; ++c) {
    if (s.floored[c]) continue;
    const double dp = dr[c] * 10.0 / (std::numbers::ln10 * s.power[c]);
    const cplx scale = 2.0 * dp * std::conj(s.s[c]);
    for (std::size_t i = 0; i < n; ++i) g.probing(i, c) += scale * s.h[i];
  }
  (void)b;
}

void apply_sgd(std::span<double> params, std::span<const double> grad, double step) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= step * grad[i];
}

struct AdamState {
  std::vector<double> m, v;
  long t = 0;

  void step(std::span<double> params, std::span<const double> grad, const TrainConfig& cfg) {
    if (m.empty()) {
      m.assign(params.size(), 0.0);
      v.assign(params.size(), 0.0);
    }
    ++t;
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * grad[i];
      v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * grad[i] * grad[i];
      params[i] -= cfg.step * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.adam_eps);
    }
  }
};

std::span<double> as_reals(CMat& m) { return {reinterpret_cast<double*>(m.data()), 2 * m.values().size()}; }

ChannelDataset subset(const ChannelDataset& ds, std::span<const std::size_t> idx) {
  ChannelDataset out;
  out.n_t = ds.n_t;
  out.origin = ds.origin;
  out.samples.reserve(idx.size());
  for (auto i : idx) out.samples.push_back(ds.samples[i]);
  return out;
}

}  // namespace

MlpModel::MlpModel(int n_t, int k, int q, int depth, int width)
    : n_t_(n_t), k_(k), q_(q), depth_(depth), width_(width) {
  if (n_t < 1 || k < 1 || q < 1 || depth < 1 || width < 1 || q > n_t)
    throw Error(ErrorCode::invalid_argument, "MlpModel: invalid architecture");
  std::size_t off = 0;
  std::size_t in = static_cast<std::size_t>(k);
  const auto w = static_cast<std::size_t>(width);
  for (int d = 0; d < depth; ++d) {
    LayerSlots L;
    L.in = in;
    L.out = w;
    L.weight = off;
    off += w * in;
    L.bias = off;
    off += w;
    L.ln_scale = off;
    off += w;
    L.ln_shift = off;
    off += w;
    layers_.push_back(L);
    in = w;
  }
  out_weight_ = off;
  off += output_size() * w;
  out_bias_ = off;
  off += output_size();
  theta_.assign(off, 0.0);
  for (const auto& L : layers_) std::fill_n(theta_.begin() + static_cast<std::ptrdiff_t>(L.ln_scale), L.out, 1.0);
}

MlpModel MlpModel::init(int n_t, int k, int q, int depth, int width, std::uint64_t seed) {
  MlpModel m(n_t, k, q, depth, width);
  Rng rng(seed);
  for (const auto& L : m.layers_) {
    const double a = std::sqrt(3.0 / static_cast<double>(L.in));
    for (std::size_t i = 0; i < L.out * L.in; ++i) m.theta_[L.weight + i] = rng.uniform(-a, a);
  }
  const double a = std::sqrt(3.0 / static_cast<double>(width));
  for (std::size_t i = 0; i < m.output_size() * static_cast<std::size_t>(width); ++i)
    m.theta_[m.out_weight_ + i] = rng.uniform(-a, a);
  return m;
}

std::vector<MlpModel::Tensor> MlpModel::tensors() const {
  std::vector<Tensor> t;
  for (std::size_t d = 0; d < layers_.size(); ++d) {
    const auto& L = layers_[d];
    const auto tag = std::to_string(d + 1);
    t.push_back({"W" + tag, L.weight, L.out * L.in});
    t.push_back({"b" + tag, L.bias, L.out});
    t.push_back({"ln_scale" + tag, L.ln_scale, L.out});
    t.push_back({"ln_shift" + tag, L.ln_shift, L.out});
  }
  t.push_back({"W_out", out_weight_, output_size() * static_cast<std::size_t>(width_)});
  t.push_back({"b_out", out_bias_, output_size()});
  return t;
}

double gelu(double x) { return 0.5 * x * std::erfc(-x / std::numbers::sqrt2); }

double gelu_grad(double x) {
  const double cdf = 0.5 * std::erfc(-x / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw Error(ErrorCode::config, "train: batch_size must be >= 1");
  if (!(step >= 0.0)) throw Error(ErrorCode::config, "train: step must be non-negative");
  if (epochs < 0) throw Error(ErrorCode::config, "train: epochs must be non-negative");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw Error(ErrorCode::config, "train: val_fraction must be in [0, 1)");
  if (!(ridge_eps >= 0.0)) throw Error(ErrorCode::config, "train: ridge_eps must be non-negative");
  if (k < 1 || q < 1 || depth < 1 || width < 1) throw Error(ErrorCode::config, "train: invalid architecture");
  noise.validate();
}

RVec encode(const TrainableProbing& b, std::span<const cplx> h, double p_ssb) {
  if (h.size() != b.b.rows()) throw Error(ErrorCode::dimension_mismatch, "encode: channel length differs from n_t");
  require_nonzero_channel(h);
  const CVec s = matmul_herm(b.b, h);
  RVec r(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) r[k] = power_to_db(p_ssb * std::norm(s[k]));
  return r;
}

CMat decode(const MlpModel& m, std::span<const double> fingerprint) {
  return reshape_output(mlp_forward(m, fingerprint, {}), m.n_t(), m.q());
}

LossValue subspace_loss(const CMat& c_raw, std::span<const cplx> h, double ridge_eps) {
  const auto rc = ridge_capture(c_raw, h, ridge_eps);
  return {-rc.eta, rc.eta};
}

RVec draw_rsrp_noise(Rng& rng, int k, const NoiseModel& noise) {
  RVec out(static_cast<std::size_t>(k), 0.0);
  if (!noise.enabled) return out;
  for (auto& v : out) v = rng.normal(noise.mu_b, noise.sigma_b);
  return out;
}

SampleForward forward_sample(const TrainableProbing& b, const MlpModel& m, std::span<const cplx> h,
                             std::span<const double> noise_db, double p_ssb, double ridge_eps) {
  if (b.k() != m.k() || b.n_t() != m.n_t()) throw Error(ErrorCode::dimension_mismatch, "probing and decoder shapes differ");
  if (!noise_db.empty() && noise_db.size() != static_cast<std::size_t>(b.k()))
    throw Error(ErrorCode::dimension_mismatch, "noise vector length differs from K");
  if (h.size() != b.b.rows()) throw Error(ErrorCode::dimension_mismatch, "forward: channel length differs from n_t");
  require_nonzero_channel(h);

  SampleForward s;
  s.h.assign(h.begin(), h.end());
  s.h_energy = norm_sq(h);
  s.s = matmul_herm(b.b, h);
  const std::size_t k = s.s.size();
  s.power.resize(k);
  s.floored.resize(k);
  s.r.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    s.power[c] = std::norm(s.s[c]);
    const double db = 10.0 * std::log10(p_ssb * s.power[c]);
    s.floored[c] = !(db > kRsrpFloorDb);
    s.r[c] = (s.floored[c] ? kRsrpFloorDb : db) + (noise_db.empty() ? 0.0 : noise_db[c]);
  }
  standardize(s);
  s.out = mlp_forward(m, s.x, {&s.layer_in, &s.layer_xhat, &s.layer_y, &s.layer_inv_std});
  s.c_raw = reshape_output(s.out, m.n_t(), m.q());
  auto rc = ridge_capture(s.c_raw, h, ridge_eps);
  s.col_norm = std::move(rc.col_norm);
  s.c_hat = std::move(rc.c_hat);
  s.coef = std::move(rc.coef);
  s.resid = std::move(rc.resid);
  s.eta = rc.eta;
  return s;
}

Gradients Gradients::zeros_like(const MlpModel& m, const TrainableProbing& b) {
  return {std::vector<double>(m.theta().size(), 0.0), CMat(b.b.rows(), b.b.cols())};
}

void Gradients::add(const Gradients& other) {
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += other.theta[i];
  for (std::size_t i = 0; i < probing.values().size(); ++i) probing.data()[i] += other.probing.data()[i];
}

double Gradients::norm() const {
  double e = 0.0;
  for (double v : theta) e += v * v;
  return std::sqrt(e + norm_sq(probing.values()));
}

Gradients backward(const MlpModel& m, const TrainableProbing& b, std::span<const SampleForward> batch,
                   std::span<const double> d_eta, bool include_probing) {
  if (batch.size() != d_eta.size()) throw Error(ErrorCode::dimension_mismatch, "backward: upstream length differs from batch");
  Gradients g = Gradients::zeros_like(m, b);
  for (std::size_t i = 0; i < batch.size(); ++i) accumulate_sample(m, b, batch[i], d_eta[i], include_probing, g);
  return g;
}

double mean_training_eta(const TrainableProbing& b, const MlpModel& m, const ChannelDataset& ds,
                         const NoiseModel& noise, double ridge_eps, std::uint64_t noise_seed, int threads) {
  if (ds.samples.empty()) throw Error(ErrorCode::invalid_argument, "mean_training_eta: empty dataset");
  RVec eta(ds.size());
  parallel_for(ds.size(), threads, [&](std::size_t i) {
    Rng rng(derive_seed(noise_seed, i));
    const RVec nz = draw_rsrp_noise(rng, b.k(), noise);
    eta[i] = forward_sample(b, m, ds.samples[i].h, nz, noise.p_ssb, ridge_eps).eta;
  });
  return std::accumulate(eta.begin(), eta.end(), 0.0) / static_cast<double>(eta.size());
}

TrainResult train(const ChannelDataset& train_set, const ChannelDataset& val_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.samples.empty() || val_set.samples.empty()) throw Error(ErrorCode::invalid_argument, "train: empty split");
  if (train_set.n_t != val_set.n_t) throw Error(ErrorCode::dimension_mismatch, "train: splits differ in n_t");
  if (train_set.size() < static_cast<std::size_t>(cfg.batch_size))
    throw Error(ErrorCode::invalid_argument, "train: fewer training samples than the batch size");
  const int n_t = train_set.n_t;
  if (cfg.q > n_t) throw Error(ErrorCode::config, "train: q exceeds n_t");
  for (const auto* ds : {&train_set, &val_set})
    for (const auto& s : ds->samples)
      if (s.h.size() != static_cast<std::size_t>(n_t))
        throw Error(ErrorCode::dimension_mismatch, "train: channel length differs from the dataset n_t");

  TrainResult res;
  res.probing = TrainableProbing::from_codebook(cfg.probing_init == ProbingInit::dft
                                                    ? dft_sweep(n_t, cfg.k)
                                                    : random_codebook(n_t, cfg.k, derive_seed(cfg.seed, 11)));
  res.model = MlpModel::init(n_t, cfg.k, cfg.q, cfg.depth, cfg.width, derive_seed(cfg.seed, 12));
  Rng shuffle_rng(derive_seed(cfg.seed, 13));
  Rng noise_rng(derive_seed(cfg.seed, 14));
  const std::uint64_t val_noise_seed = derive_seed(cfg.seed, 15);
  const std::uint64_t train_noise_seed = derive_seed(cfg.seed, 16);

  auto& trace = res.trace;
  trace.initial_train_eta =
      mean_training_eta(res.probing, res.model, train_set, cfg.noise, cfg.ridge_eps, train_noise_seed, cfg.threads);
  trace.initial_val_eta =
      mean_training_eta(res.probing, res.model, val_set, cfg.noise, cfg.ridge_eps, val_noise_seed, cfg.threads);

  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t batches = train_set.size() / batch;
  const std::size_t chunks = std::min(kGradChunks, batch);
  AdamState adam_theta, adam_probe;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) try {
    const auto t0 = std::chrono::steady_clock::now();
    const auto perm = shuffle_rng.permutation(train_set.size());
    double eta_sum = 0.0, grad_norm_sum = 0.0;
    for (std::size_t it = 0; it < batches; ++it) {
      std::vector<RVec> noise(batch);
      for (auto& nz : noise) nz = draw_rsrp_noise(noise_rng, cfg.k, cfg.noise);

      std::vector<Gradients> chunk_grads(chunks);
      RVec etas(batch);
      parallel_for(chunks, cfg.threads, [&](std::size_t c) {
        Gradients g = Gradients::zeros_like(res.model, res.probing);
        for (std::size_t i = c * batch / chunks; i < (c + 1) * batch / chunks; ++i) {
          const auto& h = train_set.samples[perm[it * batch + i]].h;
          const auto fwd = forward_sample(res.probing, res.model, h, noise[i], cfg.noise.p_ssb, cfg.ridge_eps);
          etas[i] = fwd.eta;
          accumulate_sample(res.model, res.probing, fwd, -1.0 / static_cast<double>(batch), cfg.train_probing, g);
        }
        chunk_grads[c] = std::move(g);
      });
      Gradients grad = std::move(chunk_grads[0]);
      for (std::size_t c = 1; c < chunks; ++c) grad.add(chunk_grads[c]);

      const double batch_eta = std::accumulate(etas.begin(), etas.end(), 0.0) / static_cast<double>(batch);
      const double gnorm = grad.norm();
      if (!std::isfinite(batch_eta) || !std::isfinite(gnorm))
        throw TrainingDiverged("training loss became non-finite at epoch " + std::to_string(epoch), trace);
      eta_sum += batch_eta;
      grad_norm_sum += gnorm;

      if (cfg.optimizer == Optimizer::sgd) {
        apply_sgd(res.model.theta(), grad.theta, cfg.step);
        if (cfg.train_probing) apply_sgd(as_reals(res.probing.b), as_reals(grad.probing), cfg.step);
      } else {
        adam_theta.step(res.model.theta(), grad.theta, cfg);
        if (cfg.train_probing) adam_probe.step(as_reals(res.probing.b), as_reals(grad.probing), cfg);
      }
      if (cfg.train_probing) normalize_columns(res.probing.b);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_eta = batches ? eta_sum / static_cast<double>(batches) : 0.0;
    rec.grad_norm = batches ? grad_norm_sum / static_cast<double>(batches) : 0.0;
    rec.val_eta = mean_training_eta(res.probing, res.model, val_set, cfg.noise, cfg.ridge_eps, val_noise_seed, cfg.threads);
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!std::isfinite(rec.val_eta)) {
      trace.epochs.push_back(rec);
      throw TrainingDiverged("validation efficiency became non-finite at epoch " + std::to_string(epoch), trace);
    }
    trace.epochs.push_back(rec);
  } catch (const TrainingDiverged&) {
    throw;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::numeric_failure) throw;
    throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch) + ": " + e.what(), trace);
  }
  return res;
}

TrainResult train(const ChannelDataset& dataset, const TrainConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, 10));
  const auto perm = rng.permutation(dataset.size());
  const auto n_val = static_cast<std::size_t>(std::floor(cfg.val_fraction * static_cast<double>(dataset.size())));
  if (n_val == 0 || n_val >= dataset.size()) throw Error(ErrorCode::invalid_argument, "train: validation split is empty or covers the dataset");
  const std::span<const std::size_t> all(perm);
  return train(subset(dataset, all.subspan(n_val)), subset(dataset, all.first(n_val)), cfg);
}

FeedbackOutcome export_deployment(const TrainableProbing& b, const MlpModel& m, std::span<const cplx> h,
                                  const NoiseModel& noise, std::uint64_t seed, const LinkParams& link) {
  const auto fp = rsrp_fingerprint(h, b.codebook(), noise, seed);
  const CMat c_raw = decode(m, normalize_fingerprint(fp.values_db));
  const Subspace sub = Subspace::from_span(c_raw);
  auto out = proposed(h, sub, b.k(), link);
  if (sub.dim() < m.q()) out.flags |= kFlagReducedRank;
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const TrainableProbing& b, const MlpModel& m) {
  binio::Writer w;
  w.bytes(kCheckpointMagic);
  w.u8(kCheckpointVersion);
  for (int v : {m.n_t(), m.k(), m.q(), m.depth(), m.width()}) w.u32(static_cast<std::uint32_t>(v));
  write_codebook_payload(w, b.codebook());
  for (const auto& t : m.tensors()) {
    w.u32(static_cast<std::uint32_t>(t.size));
    for (std::size_t i = 0; i < t.size; ++i) w.f64(m.theta()[t.offset + i]);
  }
  w.save(path);
}

std::pair<TrainableProbing, MlpModel> load_checkpoint(const std::filesystem::path& path) {
  auto r = binio::Reader::open(path);
  r.expect_magic(kCheckpointMagic);
  const auto version = r.u8();
  if (version != kCheckpointVersion) throw Error(ErrorCode::format, "unsupported checkpoint version");
  int dims[5];
  for (auto& d : dims) d = static_cast<int>(r.u32());
  MlpModel m(dims[0], dims[1], dims[2], dims[3], dims[4]);
  const auto book = read_codebook_payload(r);
  if (book.n_t() != m.n_t() || book.size() != m.k()) throw Error(ErrorCode::format, "checkpoint probing shape differs from config block");
  for (const auto& t : m.tensors()) {
    if (r.u32() != t.size) throw Error(ErrorCode::format, "checkpoint tensor " + t.name + " has unexpected length");
    for (std::size_t i = 0; i < t.size; ++i) m.theta()[t.offset + i] = r.f64();
  }
  if (r.remaining() != 0) throw Error(ErrorCode::format, "trailing bytes in checkpoint");
  return {TrainableProbing{book.beams}, std::move(m)};
}

}  // namespace sitefb
