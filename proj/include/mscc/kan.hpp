#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "mscc/colorimetry.hpp"
#include "mscc/dataset_io.hpp"
#include "mscc/spectral.hpp"

namespace mscc {
namespace kan {

/// Cubic B-spline layer geometry: 5 grid intervals on [0,1] with clamped
/// knots give 8 basis functions per edge.
constexpr int kSplineDegree = 3;
constexpr int kGridIntervals = 5;
constexpr int kBasisCount = kGridIntervals + kSplineDegree;  // 8
constexpr int kKnotCount = kGridIntervals + 2 * kSplineDegree + 1;  // 12

/// The clamped knot vector (0 x4, 0.2, 0.4, 0.6, 0.8, 1 x4).
const std::array<double, kKnotCount>& knot_vector();

/// All 8 cubic basis values at x (input clamped to [0,1]).
std::array<double, kBasisCount> bspline_basis(double x);

/// Basis values plus their first derivatives.
void bspline_basis_deriv(double x, std::array<double, kBasisCount>& basis,
                         std::array<double, kBasisCount>& deriv);

enum class ParamGroup { MsEncoder, SplineCoeffs, Bypass, Bias };

/// Flat parameter store for the per-pixel corrector:
///   ms_encoder  K x C        spectral projection
///   coeffs      3 x D x 8    per-edge spline coefficients, D = 3 + K
///   bypass      3 x D        linear shortcut weights
///   bias        3
struct KanParams {
  int spectral_features = 6;  // K
  int ms_channels = 15;       // C
  std::vector<double> theta;

  int feature_count() const { return 3 + spectral_features; }
  std::size_t encoder_offset() const { return 0; }
  std::size_t encoder_size() const {
    return static_cast<std::size_t>(spectral_features) * ms_channels;
  }
  std::size_t coeffs_offset() const { return encoder_size(); }
  std::size_t coeffs_size() const {
    return static_cast<std::size_t>(3) * feature_count() * kBasisCount;
  }
  std::size_t bypass_offset() const { return coeffs_offset() + coeffs_size(); }
  std::size_t bypass_size() const {
    return static_cast<std::size_t>(3) * feature_count();
  }
  std::size_t bias_offset() const { return bypass_offset() + bypass_size(); }
  std::size_t total_size() const { return bias_offset() + 3; }

  double encoder(int k, int m) const {
    return theta[encoder_offset() + static_cast<std::size_t>(k) * ms_channels + m];
  }
  double coeff(int q, int j, int i) const {
    return theta[coeffs_offset() +
                 (static_cast<std::size_t>(q) * feature_count() + j) * kBasisCount + i];
  }
  double bypass(int q, int j) const {
    return theta[bypass_offset() + static_cast<std::size_t>(q) * feature_count() + j];
  }
  double bias(int q) const { return theta[bias_offset() + q]; }

  std::pair<std::size_t, std::size_t> group_span(ParamGroup g) const;
};

/// Seeded initialization: identity-like bypass on the RGB features, small
/// random spline coefficients and encoder weights.
KanParams init_params(int spectral_features, int ms_channels,
                      std::uint64_t seed);

/// Squash x/(1 + |x|) mapping linear radiance into the spline domain; equals
/// x/(1+x) on the non-negative inputs the contract names and stays finite if
/// a learned projection goes negative.
double squash(double x);
double squash_deriv(double x);

/// Feature vector: squashed rgb triple followed by the squashed spectral
/// projection of the MS context.
std::vector<double> build_features(const std::vector<double>& rgb_pixel,
                                   const std::vector<double>& ms_context,
                                   const KanParams& params);

/// y_q = bias_q + sum_j [ bypass_qj * x_j + sum_i coeff_qji * B_i(x_j) ].
std::array<double, 3> kan_forward(const KanParams& params,
                                  const std::vector<double>& features);

/// Analytic gradients of kan_forward. Parameter gradients are accumulated
/// into grad_theta (sized like params.theta); feature gradients returned.
std::vector<double> kan_backward(const KanParams& params,
                                 const std::vector<double>& features,
                                 const std::array<double, 3>& upstream,
                                 std::vector<double>& grad_theta);

/// Chains build_features: adds the encoder gradient given feature gradients.
void features_backward(const std::vector<double>& rgb_pixel,
                       const std::vector<double>& ms_context,
                       const KanParams& params,
                       const std::vector<double>& grad_features,
                       std::vector<double>& grad_theta);

struct LossValue {
  double value = 0.0;
  std::array<double, 3> grad{};  // w.r.t. predicted xyz
};

/// Delta-E76 between pred and gt after Lab conversion, with the analytic
/// gradient w.r.t. the predicted tristimulus values.
LossValue loss_de76(const std::array<double, 3>& pred_xyz,
                    const std::array<double, 3>& gt_xyz,
                    const WhitePoint& white);

struct TrainConfig {
  double lr = 1e-4;
  int max_epochs = 300;
  int patience = 5;
  int batch = 4096;
  int pixels_per_epoch = 65536;
  int val_pixels_per_image = 2048;
  std::uint64_t seed = 0;
  int spectral_features = 6;
  std::set<ParamGroup> freeze;

  void validate() const;
};

/// Cosine annealing: 0.5 * lr0 * (1 + cos(pi * epoch / max_epochs)).
double cosine_lr(int epoch, const TrainConfig& config);

struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  explicit OptimizerState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// One Adam update over every group outside `freeze`; frozen parameters and
/// their moments are untouched.
void adam_step(OptimizerState& state, KanParams& params,
               const std::vector<double>& grads, double lr,
               const std::set<ParamGroup>& freeze);

struct EpochLog {
  int epoch = 0;  // 1-based
  double lr = 0.0;
  double train_loss = 0.0;
  double val_metric = 0.0;
};

struct TrainResult {
  KanParams params;  // best-validation checkpoint
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val = 0.0;
};

/// Mini-batch training with early stopping on the validation Delta-E76.
TrainResult train(const DatasetManifest& manifest, const TrainConfig& config,
                  const KanParams* init = nullptr);

/// Bilinear sample of the low-resolution MS image at the RGB pixel (y, x).
void ms_sample(const PlanarImage& ms, int factor, int y, int x,
               std::vector<double>& out);

/// Full-image inference: upsampled MS + per-pixel forward, clipped at zero,
/// tagged xyz; output mask equals the rgb mask.
PlanarImage predict_image(const KanParams& params, const PlanarImage& rgb,
                          const PlanarImage& ms);

/// Checkpoint: JSON header line + f32 payload, exact round trip.
void save_checkpoint(const std::string& path, const KanParams& params,
                     std::uint64_t config_hash);
struct Checkpoint {
  KanParams params;
  std::uint64_t config_hash = 0;
};
Checkpoint load_checkpoint(const std::string& path);

/// Training log serialization (JSON) used by the CLI and the experiments.
std::string log_to_json(const TrainResult& result);

}  // namespace kan
}  // namespace mscc
