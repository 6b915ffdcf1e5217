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

#ifndef SITEFB_LEARN_HPP
#define SITEFB_LEARN_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sitefb/channel.hpp"
#include "sitefb/error.hpp"
#include "sitefb/numkernel.hpp"
#include "sitefb/probing.hpp"
#include "sitefb/rng.hpp"
#include "sitefb/schemes.hpp"

namespace sitefb {

// Offsets of one hidden layer's tensors inside MlpModel::theta.
struct LayerSlots {
  std::size_t in = 0, out = 0;
  std::size_t weight = 0;  // out x in, row-major
  std::size_t bias = 0;
  std::size_t ln_scale = 0;
  std::size_t ln_shift = 0;
};

// Subspace decoder: depth x [Linear -> LayerNorm -> GELU] followed by a
// linear output layer with 2 * n_t * q outputs, reshaped into a complex
// n_t x q basis. All real parameters live in one flat vector.
class MlpModel {
 public:
  MlpModel() = default;
  MlpModel(int n_t, int k, int q, int depth, int width);

  // Variance-scaled symmetric uniform weights (var = 1 / fan_in), zero
  // biases, LayerNorm scale 1 and shift 0.
  static MlpModel init(int n_t, int k, int q, int depth, int width, std::uint64_t seed);

  int n_t() const { return n_t_; }
  int k() const { return k_; }
  int q() const { return q_; }
  int depth() const { return depth_; }
  int width() const { return width_; }
  std::size_t output_size() const { return static_cast<std::size_t>(2 * n_t_ * q_); }

  const std::vector<LayerSlots>& layers() const { return layers_; }
  std::size_t out_weight() const { return out_weight_; }
  std::size_t out_bias() const { return out_bias_; }

  std::vector<double>& theta() { return theta_; }
  const std::vector<double>& theta() const { return theta_; }

  // Named tensor views, used by checkpoints and gradient checks.
  struct Tensor {
    std::string name;
    std::size_t offset;
    std::size_t size;
  };
  std::vector<Tensor> tensors() const;

 private:
  int n_t_ = 0, k_ = 0, q_ = 0, depth_ = 0, width_ = 0;
  std::vector<LayerSlots> layers_;
  std::size_t out_weight_ = 0, out_bias_ = 0;
  std::vector<double> theta_;
};

inline constexpr double kLayerNormEps = 1e-8;

double gelu(double x);
double gelu_grad(double x);

// Trainable probing codebook with unit-norm columns.
struct TrainableProbing {
  CMat b;

  static TrainableProbing from_codebook(const Codebook& book) { return {book.beams}; }
  Codebook codebook(CodebookKind kind = CodebookKind::learned) const { return {b, kind}; }
  int n_t() const { return static_cast<int>(b.rows()); }
  int k() const { return static_cast<int>(b.cols()); }
};

enum class Optimizer { sgd, adam };
enum class ProbingInit { dft, random };

struct TrainConfig {
  int k = 8;
  int q = 4;
  int depth = 3;
  int width = 256;
  int batch_size = 32;
  double step = 0.05;  // beta
  int epochs = 200;
  Optimizer optimizer = Optimizer::sgd;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  NoiseModel noise;
  std::uint64_t seed = 7;
  double ridge_eps = 1e-6;
  double val_fraction = 0.15;
  ProbingInit probing_init = ProbingInit::dft;
  bool train_probing = true;  // false: decoder-only training with fixed probing
  int threads = 1;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_eta = 0.0;
  double val_eta = 0.0;
  double grad_norm = 0.0;
  double wall_seconds = 0.0;
};

struct TrainTrace {
  double initial_train_eta = 0.0;  // before the first update
  double initial_val_eta = 0.0;
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  TrainableProbing probing;
  MlpModel model;
  TrainTrace trace;
};

// Raised when the loss becomes non-finite; carries the trace up to failure.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& what, TrainTrace trace)
      : Error(ErrorCode::numeric_failure, what), trace_(std::move(trace)) {}
  const TrainTrace& trace() const { return trace_; }

 private:
  TrainTrace trace_;
};

// r0 = 10 log10(p_ssb |B^H h|^2), floored like rsrp_fingerprint.
RVec encode(const TrainableProbing& b, std::span<const cplx> h, double p_ssb);

// Raw (pre-orthonormalization) n_t x q basis from a standardized fingerprint.
CMat decode(const MlpModel& m, std::span<const double> fingerprint);

struct LossValue {
  double loss = 0.0;
  double eta = 0.0;
};

// Differentiable capture efficiency: columns of c_raw are normalized to unit
// norm and eta = h^H C (C^H C + eps I)^{-1} C^H h / ||h||^2; loss = -eta.
LossValue subspace_loss(const CMat& c_raw, std::span<const cplx> h, double ridge_eps);

// Additive measurement noise drawn exactly as the training noise layer does.
RVec draw_rsrp_noise(Rng& rng, int k, const NoiseModel& noise);

// Recorded forward pass of one sample through encoder, noise, decoder, loss.
struct SampleForward {
  CVec h;
  double h_energy = 0.0;
  CVec s;              // B^H h
  RVec power;          // |s|^2
  std::vector<bool> floored;
  RVec r;              // noisy fingerprint, dB
  RVec x;              // standardized fingerprint
  double r_mean = 0.0, r_sd = 0.0;
  std::vector<RVec> layer_in, layer_xhat, layer_y;
  RVec layer_inv_std;
  RVec out;
  CMat c_raw;
  RVec col_norm;
  CMat c_hat;
  CVec coef;   // (C^H C + eps I)^{-1} C^H h
  CVec resid;  // h - C coef
  double eta = 0.0;
};

SampleForward forward_sample(const TrainableProbing& b, const MlpModel& m, std::span<const cplx> h,
                             std::span<const double> noise_db, double p_ssb, double ridge_eps);

struct Gradients {
  std::vector<double> theta;
  CMat probing;  // d/dRe in real part, d/dIm in imaginary part

  static Gradients zeros_like(const MlpModel& m, const TrainableProbing& b);
  void add(const Gradients& other);
  double norm() const;
};

// Reverse-mode gradients of sum_i d_eta[i] * eta_i over the recorded batch.
// The noise layer is an additive constant, so gradients pass through it.
Gradients backward(const MlpModel& m, const TrainableProbing& b, std::span<const SampleForward> batch,
                   std::span<const double> d_eta, bool include_probing = true);

// Mini-batch training with projected updates on the probing columns.
TrainResult train(const ChannelDataset& train_set, const ChannelDataset& val_set, const TrainConfig& cfg);
// Splits `dataset` by cfg.val_fraction under cfg.seed, then trains.
TrainResult train(const ChannelDataset& dataset, const TrainConfig& cfg);

// Mean ridge-path eta over a dataset with noise drawn from `noise_seed`.
double mean_training_eta(const TrainableProbing& b, const MlpModel& m, const ChannelDataset& ds,
                         const NoiseModel& noise, double ridge_eps, std::uint64_t noise_seed, int threads = 1);

// Online deployment: sweep B, measure a noisy fingerprint, decode and
// orthonormalize the basis, then run the proposed feedback scheme.
FeedbackOutcome export_deployment(const TrainableProbing& b, const MlpModel& m, std::span<const cplx> h,
                                  const NoiseModel& noise, std::uint64_t seed, const LinkParams& link);

// Checkpoint interchange ("BLML1").
void save_checkpoint(const std::filesystem::path& path, const TrainableProbing& b, const MlpModel& m);
std::pair<TrainableProbing, MlpModel> load_checkpoint(const std::filesystem::path& path);

}  // namespace sitefb

#endif  // SITEFB_LEARN_HPP
