#include "mscc/kan.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "mscc/rng.hpp"
#include "json.hpp"

namespace mscc {
namespace kan {

const std::array<double, kKnotCount>& knot_vector() {
  static const std::array<double, kKnotCount> knots = {
      0.0, 0.0, 0.0, 0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.0, 1.0, 1.0};
  return knots;
}

namespace {

// Iterative Cox-de Boor over the clamped knot vector. Returns the degree-3
// values in n3 and, when requested, the degree-2 values in n2 (for the
// derivative identity). Input x must already be clamped to [0,1].
void cox_de_boor(double x, std::array<double, kBasisCount>& n3,
                 std::array<double, kBasisCount + 1>* n2_out) {
  const auto& t = knot_vector();
  constexpr int n0_count = kKnotCount - 1;  // 11 degree-0 slots
  std::array<double, n0_count> cur{};
  for (int i = 0; i < n0_count; ++i) {
    bool last_span = t[i] < 1.0 && t[i + 1] == 1.0;
    bool inside = last_span ? (x >= t[i] && x <= t[i + 1])
                            : (x >= t[i] && x < t[i + 1]);
    cur[i] = (inside && t[i] < t[i + 1]) ? 1.0 : 0.0;
  }
  std::array<double, n0_count> next{};
  for (int d = 1; d <= kSplineDegree; ++d) {
    const int count = n0_count - d;
    for (int i = 0; i < count; ++i) {
      double acc = 0.0;
      double den1 = t[i + d] - t[i];
      if (den1 > 0.0) acc += (x - t[i]) / den1 * cur[i];
      double den2 = t[i + d + 1] - t[i + 1];
      if (den2 > 0.0) acc += (t[i + d + 1] - x) / den2 * cur[i + 1];
      next[i] = acc;
    }
    if (d == kSplineDegree - 1 && n2_out != nullptr)
      for (int i = 0; i < kBasisCount + 1; ++i) (*n2_out)[i] = next[i];
    cur = next;
  }
  for (int i = 0; i < kBasisCount; ++i) n3[i] = cur[i];
}

}  // namespace

std::array<double, kBasisCount> bspline_basis(double x) {
  x = std::clamp(x, 0.0, 1.0);
  std::array<double, kBasisCount> n3{};
  cox_de_boor(x, n3, nullptr);
  return n3;
}

void bspline_basis_deriv(double x, std::array<double, kBasisCount>& basis,
                         std::array<double, kBasisCount>& deriv) {
  x = std::clamp(x, 0.0, 1.0);
  std::array<double, kBasisCount + 1> n2{};
  cox_de_boor(x, basis, &n2);
  const auto& t = knot_vector();
  for (int i = 0; i < kBasisCount; ++i) {
    double term1 = 0.0, term2 = 0.0;
    double den1 = t[i + kSplineDegree] - t[i];
    if (den1 > 0.0) term1 = n2[i] / den1;
    double den2 = t[i + kSplineDegree + 1] - t[i + 1];
    if (den2 > 0.0) term2 = n2[i + 1] / den2;
    deriv[i] = kSplineDegree * (term1 - term2);
  }
}

std::pair<std::size_t, std::size_t> KanParams::group_span(ParamGroup g) const {
  switch (g) {
    case ParamGroup::MsEncoder: return {encoder_offset(), encoder_size()};
    case ParamGroup::SplineCoeffs: return {coeffs_offset(), coeffs_size()};
    case ParamGroup::Bypass: return {bypass_offset(), bypass_size()};
    case ParamGroup::Bias: return {bias_offset(), 3};
  }
  throw ConfigError("unknown parameter group");
}

KanParams init_params(int spectral_features, int ms_channels,
                      std::uint64_t seed) {
  if (spectral_features < 0 || ms_channels < 1)
    throw ConfigError("kan init: invalid dimensions");
  KanParams p;
  p.spectral_features = spectral_features;
  p.ms_channels = ms_channels;
  p.theta.assign(p.total_size(), 0.0);
  Rng rng(seed);
  for (std::size_t i = 0; i < p.encoder_size(); ++i)
    p.theta[p.encoder_offset() + i] = 0.1 * rng.normal();
  for (std::size_t i = 0; i < p.coeffs_size(); ++i)
    p.theta[p.coeffs_offset() + i] = 0.05 * rng.normal();
  // Identity-like shortcut from the squashed rgb features.
  const int d = p.feature_count();
  for (int q = 0; q < 3; ++q)
    p.theta[p.bypass_offset() + static_cast<std::size_t>(q) * d + q] = 1.0;
  return p;
}

double squash(double x) { return x / (1.0 + std::abs(x)); }

double squash_deriv(double x) {
  double t = 1.0 + std::abs(x);
  return 1.0 / (t * t);
}

std::vector<double> build_features(const std::vector<double>& rgb_pixel,
                                   const std::vector<double>& ms_context,
                                   const KanParams& params) {
  if (rgb_pixel.size() != 3)
    throw ConfigError("build features: rgb pixel must have 3 channels");
  if (static_cast<int>(ms_context.size()) != params.ms_channels &&
      params.spectral_features > 0)
    throw ConfigError("build features: ms context size mismatch");
  std::vector<double> feat(params.feature_count());
  for (int c = 0; c < 3; ++c) feat[c] = squash(rgb_pixel[c]);
  for (int k = 0; k < params.spectral_features; ++k) {
    double u = 0.0;
    for (int m = 0; m < params.ms_channels; ++m)
      u += params.encoder(k, m) * ms_context[m];
    feat[3 + k] = squash(u);
  }
  return feat;
}

std::array<double, 3> kan_forward(const KanParams& params,
                                  const std::vector<double>& features) {
  const int d = params.feature_count();
  if (static_cast<int>(features.size()) != d)
    throw ConfigError("kan forward: feature size mismatch");
  std::array<double, 3> y = {params.bias(0), params.bias(1), params.bias(2)};
  std::array<double, kBasisCount> basis{};
  for (int j = 0; j < d; ++j) {
    double xj = features[j];
    basis = bspline_basis(xj);
    for (int q = 0; q < 3; ++q) {
      double acc = params.bypass(q, j) * xj;
      for (int i = 0; i < kBasisCount; ++i)
        acc += params.coeff(q, j, i) * basis[i];
      y[q] += acc;
    }
  }
  return y;
}

std::vector<double> kan_backward(const KanParams& params,
                                 const std::vector<double>& features,
                                 const std::array<double, 3>& upstream,
                                 std::vector<double>& grad_theta) {
  const int d = params.feature_count();
  if (static_cast<int>(features.size()) != d)
    throw ConfigError("kan backward: feature size mismatch");
  if (grad_theta.size() != params.theta.size())
    throw ConfigError("kan backward: gradient buffer size mismatch");

  for (int q = 0; q < 3; ++q)
    grad_theta[params.bias_offset() + q] += upstream[q];

  std::vector<double> grad_feat(d, 0.0);
  std::array<double, kBasisCount> basis{}, deriv{};
  for (int j = 0; j < d; ++j) {
    double xj = features[j];
    bspline_basis_deriv(xj, basis, deriv);
    // Outside [0,1] the clamped basis is constant in the feature.
    double gate = (xj > 0.0 && xj < 1.0) ? 1.0 : 0.0;
    for (int q = 0; q < 3; ++q) {
      double g = upstream[q];
      grad_theta[params.bypass_offset() + static_cast<std::size_t>(q) * d + j] +=
          g * xj;
      double dspline = 0.0;
      std::size_t cbase =
          params.coeffs_offset() +
          (static_cast<std::size_t>(q) * d + j) * kBasisCount;
      for (int i = 0; i < kBasisCount; ++i) {
        grad_theta[cbase + i] += g * basis[i];
        dspline += params.coeff(q, j, i) * deriv[i];
      }
      grad_feat[j] += g * (params.bypass(q, j) + gate * dspline);
    }
  }
  return grad_feat;
}

void features_backward(const std::vector<double>& rgb_pixel,
                       const std::vector<double>& ms_context,
                       const KanParams& params,
                       const std::vector<double>& grad_features,
                       std::vector<double>& grad_theta) {
  (void)rgb_pixel;  // rgb feeds fixed inputs, no parameters to update
  for (int k = 0; k < params.spectral_features; ++k) {
    double u = 0.0;
    for (int m = 0; m < params.ms_channels; ++m)
      u += params.encoder(k, m) * ms_context[m];
    double chain = grad_features[3 + k] * squash_deriv(u);
    std::size_t base =
        params.encoder_offset() + static_cast<std::size_t>(k) * params.ms_channels;
    for (int m = 0; m < params.ms_channels; ++m)
      grad_theta[base + m] += chain * ms_context[m];
  }
}

namespace {

constexpr double kLabDelta = 6.0 / 29.0;
constexpr double kLabDelta3 = kLabDelta * kLabDelta * kLabDelta;

double lab_f_prime(double t) {
  if (t > kLabDelta3) return 1.0 / (3.0 * std::cbrt(t * t));
  return 1.0 / (3.0 * kLabDelta * kLabDelta);
}

}  // namespace

LossValue loss_de76(const std::array<double, 3>& pred_xyz,
                    const std::array<double, 3>& gt_xyz,
                    const WhitePoint& white) {
  LabTriple lp = xyz_to_lab({pred_xyz[0], pred_xyz[1], pred_xyz[2]}, white);
  LabTriple lg = xyz_to_lab({gt_xyz[0], gt_xyz[1], gt_xyz[2]}, white);
  LossValue out;
  out.value = delta_e76(lp, lg);
  if (out.value == 0.0) return out;  // zero subgradient at the minimum

  double dL = (lp.L - lg.L) / out.value;
  double da = (lp.a - lg.a) / out.value;
  double db = (lp.b - lg.b) / out.value;
  double fpx = lab_f_prime(pred_xyz[0] / white.Xn) / white.Xn;
  double fpy = lab_f_prime(pred_xyz[1] / white.Yn) / white.Yn;
  double fpz = lab_f_prime(pred_xyz[2] / white.Zn) / white.Zn;
  // Lab Jacobian rows: L = 116 f(Y/Yn) - 16, a = 500 (fX - fY),
  // b = 200 (fY - fZ).
  out.grad[0] = da * 500.0 * fpx;
  out.grad[1] = dL * 116.0 * fpy - da * 500.0 * fpy + db * 200.0 * fpy;
  out.grad[2] = -db * 200.0 * fpz;
  return out;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("train config: lr must be positive");
  if (max_epochs < 1) throw ConfigError("train config: max_epochs must be >= 1");
  if (patience < 1) throw ConfigError("train config: patience must be >= 1");
  if (batch < 1 || pixels_per_epoch < 1 || val_pixels_per_image < 1)
    throw ConfigError("train config: batch and pixel counts must be positive");
  if (spectral_features < 0)
    throw ConfigError("train config: spectral_features must be >= 0");
}

double cosine_lr(int epoch, const TrainConfig& config) {
  if (epoch < 0 || epoch > config.max_epochs)
    throw ConfigError("cosine lr: epoch out of range");
  return 0.5 * config.lr *
         (1.0 + std::cos(3.14159265358979323846 * epoch / config.max_epochs));
}

void adam_step(OptimizerState& state, KanParams& params,
               const std::vector<double>& grads, double lr,
               const std::set<ParamGroup>& freeze) {
  if (grads.size() != params.theta.size() || state.m.size() != grads.size())
    throw ConfigError("adam: shape mismatch");
  state.step += 1;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (ParamGroup g : {ParamGroup::MsEncoder, ParamGroup::SplineCoeffs,
                       ParamGroup::Bypass, ParamGroup::Bias}) {
    if (freeze.count(g)) continue;
    auto [off, len] = params.group_span(g);
    for (std::size_t i = off; i < off + len; ++i) {
      double gi = grads[i];
      state.m[i] = b1 * state.m[i] + (1.0 - b1) * gi;
      state.v[i] = b2 * state.v[i] + (1.0 - b2) * gi * gi;
      double mhat = state.m[i] / bc1;
      double vhat = state.v[i] / bc2;
      params.theta[i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

void ms_sample(const PlanarImage& ms, int factor, int y, int x,
               std::vector<double>& out) {
  // Pixel-center alignment between the two resolutions.
  double sx = (x + 0.5) / factor - 0.5;
  double sy = (y + 0.5) / factor - 0.5;
  sx = std::clamp(sx, 0.0, static_cast<double>(ms.width - 1));
  sy = std::clamp(sy, 0.0, static_cast<double>(ms.height - 1));
  int x0 = static_cast<int>(std::floor(sx));
  int y0 = static_cast<int>(std::floor(sy));
  int x1 = std::min(x0 + 1, ms.width - 1);
  int y1 = std::min(y0 + 1, ms.height - 1);
  double fx = sx - x0;
  double fy = sy - y0;
  out.resize(ms.channels());
  for (int c = 0; c < ms.channels(); ++c) {
    double v00 = ms.at(c, y0, x0);
    double v01 = ms.at(c, y0, x1);
    double v10 = ms.at(c, y1, x0);
    double v11 = ms.at(c, y1, x1);
    out[c] = (1 - fy) * ((1 - fx) * v00 + fx * v01) +
             fy * ((1 - fx) * v10 + fx * v11);
  }
}

PlanarImage predict_image(const KanParams& params, const PlanarImage& rgb,
                          const PlanarImage& ms) {
  if (rgb.channels() != 3) throw DataError("predict: rgb must have 3 channels");
  if (params.spectral_features > 0 && ms.channels() != params.ms_channels)
    throw DataError("predict: ms channel count mismatch");
  if (rgb.height % ms.height != 0 || rgb.width % ms.width != 0 ||
      rgb.height / ms.height != rgb.width / ms.width)
    throw DataError("predict: resolutions not related by an integer factor");
  const int factor = rgb.height / ms.height;

  PlanarImage out(rgb.height, rgb.width, 3, ColorSpace::Xyz);
  out.mask = rgb.mask;
  std::vector<double> ms_ctx(ms.channels());
  std::vector<double> rgb_px(3);
  for (int y = 0; y < rgb.height; ++y)
    for (int x = 0; x < rgb.width; ++x) {
      for (int c = 0; c < 3; ++c) rgb_px[c] = rgb.at(c, y, x);
      ms_sample(ms, factor, y, x, ms_ctx);
      auto feat = build_features(rgb_px, ms_ctx, params);
      auto y3 = kan_forward(params, feat);
      for (int c = 0; c < 3; ++c) out.at(c, y, x) = std::max(0.0, y3[c]);
    }
  return out;
}

namespace {

struct LoadedTriplet {
  PlanarImage rgb, ms, gt;
};

std::vector<LoadedTriplet> load_partition(const DatasetManifest& manifest,
                                          const std::string& which) {
  std::vector<LoadedTriplet> out;
  for (const TripletRef* ref : manifest.partition(which)) {
    LoadedTriplet t;
    t.rgb = load_image(manifest.resolve(ref->rgb_path));
    t.ms = load_image(manifest.resolve(ref->ms_path));
    t.gt = load_image(manifest.resolve(ref->gt_path));
    out.push_back(std::move(t));
  }
  return out;
}

struct PixelRef {
  int triplet, y, x;
};

std::vector<PixelRef> sample_pixels(const std::vector<LoadedTriplet>& data,
                                    int count, Rng& rng) {
  std::vector<PixelRef> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    for (int attempt = 0; attempt < 256; ++attempt) {
      int t = static_cast<int>(rng.uniform_index(data.size()));
      int y = static_cast<int>(rng.uniform_index(data[t].rgb.height));
      int x = static_cast<int>(rng.uniform_index(data[t].rgb.width));
      if (data[t].rgb.valid(y, x) && data[t].gt.valid(y, x)) {
        out.push_back({t, y, x});
        break;
      }
    }
  }
  if (out.empty()) throw DataError("training: no valid pixels to sample");
  return out;
}

}  // namespace

TrainResult train(const DatasetManifest& manifest, const TrainConfig& config,
                  const KanParams* init) {
  config.validate();
  auto train_data = load_partition(manifest, "train");
  auto val_data = load_partition(manifest, "val");
  if (train_data.empty()) throw DataError("training: empty train partition");
  if (val_data.empty()) throw DataError("training: empty val partition");
  const int ms_channels = train_data.front().ms.channels();
  const int factor = train_data.front().rgb.height / train_data.front().ms.height;

  KanParams params;
  if (init != nullptr) {
    params = *init;
    if (params.spectral_features > 0 && params.ms_channels != ms_channels)
      throw DataError("training: checkpoint ms channels do not match dataset");
  } else {
    params = init_params(config.spectral_features, ms_channels, config.seed);
  }

  const WhitePoint white = d65_white_point();

  OptimizerState state(params.theta.size());
  TrainResult result;
  result.best_val = std::numeric_limits<double>::infinity();
  KanParams best = params;
  int since_improve = 0;

  std::vector<double> grads(params.theta.size(), 0.0);
  std::vector<double> ms_ctx(ms_channels), rgb_px(3);

  auto validation_metric = [&](const KanParams& model) {
    Rng vr(mix_seed(config.seed, 0x56414cull));  // fixed stream per run
    KahanSum val_sum;
    std::size_t val_n = 0;
    for (const LoadedTriplet& t : val_data) {
      for (int i = 0; i < config.val_pixels_per_image; ++i) {
        int y = static_cast<int>(vr.uniform_index(t.rgb.height));
        int x = static_cast<int>(vr.uniform_index(t.rgb.width));
        if (!t.rgb.valid(y, x) || !t.gt.valid(y, x)) continue;
        for (int c = 0; c < 3; ++c) rgb_px[c] = t.rgb.at(c, y, x);
        ms_sample(t.ms, factor, y, x, ms_ctx);
        auto feat = build_features(rgb_px, ms_ctx, model);
        auto pred = kan_forward(model, feat);
        val_sum.add(loss_de76(pred,
                              {t.gt.at(0, y, x), t.gt.at(1, y, x),
                               t.gt.at(2, y, x)},
                              white)
                        .value);
        ++val_n;
      }
    }
    if (val_n == 0)
      throw DataError("training: validation set has no valid pixels");
    return val_sum.value() / static_cast<double>(val_n);
  };

  if (init != nullptr) {
    // Fine-tuning starts from a working model; keep it as the incumbent so
    // a harmful adaptation can never be returned.
    result.best_val = validation_metric(params);
    result.best_epoch = 0;
  }

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double lr = cosine_lr(epoch - 1, config);
    Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    auto pixels = sample_pixels(train_data, config.pixels_per_epoch, rng);

    KahanSum epoch_loss;
    std::size_t done = 0;
    while (done < pixels.size()) {
      std::size_t take = std::min<std::size_t>(config.batch, pixels.size() - done);
      std::fill(grads.begin(), grads.end(), 0.0);
      KahanSum batch_loss;
      for (std::size_t b = 0; b < take; ++b) {
        const PixelRef& px = pixels[done + b];
        const LoadedTriplet& t = train_data[px.triplet];
        for (int c = 0; c < 3; ++c) rgb_px[c] = t.rgb.at(c, px.y, px.x);
        ms_sample(t.ms, factor, px.y, px.x, ms_ctx);
        auto feat = build_features(rgb_px, ms_ctx, params);
        auto pred = kan_forward(params, feat);
        LossValue loss = loss_de76(
            pred, {t.gt.at(0, px.y, px.x), t.gt.at(1, px.y, px.x),
                   t.gt.at(2, px.y, px.x)}, white);
        if (!std::isfinite(loss.value))
          throw NumericError("training: non-finite loss at epoch " +
                             std::to_string(epoch));
        batch_loss.add(loss.value);
        auto grad_feat = kan_backward(params, feat, loss.grad, grads);
        features_backward(rgb_px, ms_ctx, params, grad_feat, grads);
      }
      const double inv = 1.0 / static_cast<double>(take);
      for (double& g : grads) g *= inv;
      adam_step(state, params, grads, lr, config.freeze);
      epoch_loss.add(batch_loss.value());
      done += take;
    }

    // Validation metric: mean Delta-E76 over the fixed pixel subset.
    const double val_metric = validation_metric(params);
    const double train_loss =
        epoch_loss.value() / static_cast<double>(pixels.size());

    result.log.push_back({epoch, lr, train_loss, val_metric});

    if (val_metric < result.best_val) {
      result.best_val = val_metric;
      result.best_epoch = epoch;
      best = params;
      since_improve = 0;
    } else {
      ++since_improve;
      if (since_improve >= config.patience) break;
    }
  }

  result.params = std::move(best);
  return result;
}

void save_checkpoint(const std::string& path, const KanParams& params,
                     std::uint64_t config_hash) {
  nlohmann::ordered_json header;
  header["magic"] = "KANC1";
  header["spectral_features"] = params.spectral_features;
  header["ms_channels"] = params.ms_channels;
  header["basis_count"] = kBasisCount;
  header["grid"] = knot_vector();
  header["config_hash"] = config_hash;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out << header.dump() << '\n';
  std::uint32_t n = static_cast<std::uint32_t>(params.theta.size());
  out.write(reinterpret_cast<const char*>(&n), 4);
  std::vector<float> payload(params.theta.size());
  for (std::size_t i = 0; i < payload.size(); ++i)
    payload[i] = static_cast<float>(params.theta[i]);
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * 4));
  if (!out) throw DataError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  std::string header_line;
  if (!std::getline(in, header_line))
    throw DataError(path + ": missing checkpoint header");
  Checkpoint ck;
  try {
    auto header = nlohmann::json::parse(header_line);
    if (header.at("magic").get<std::string>() != "KANC1")
      throw DataError(path + ": bad checkpoint magic");
    ck.params.spectral_features = header.at("spectral_features").get<int>();
    ck.params.ms_channels = header.at("ms_channels").get<int>();
    ck.config_hash = header.at("config_hash").get<std::uint64_t>();
    if (header.at("basis_count").get<int>() != kBasisCount)
      throw DataError(path + ": incompatible basis count");
    auto grid = header.at("grid").get<std::vector<double>>();
    const auto& knots = knot_vector();
    if (grid.size() != knots.size() ||
        !std::equal(grid.begin(), grid.end(), knots.begin()))
      throw DataError(path + ": incompatible spline grid");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": bad checkpoint header: " + e.what());
  }
  std::uint32_t n = 0;
  in.read(reinterpret_cast<char*>(&n), 4);
  if (in.gcount() != 4) throw DataError(path + ": truncated checkpoint");
  if (n != ck.params.total_size())
    throw DataError(path + ": parameter count mismatch");
  std::vector<float> payload(n);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(payload.size() * 4));
  if (static_cast<std::size_t>(in.gcount()) != payload.size() * 4)
    throw DataError(path + ": truncated checkpoint payload");
  ck.params.theta.resize(n);
  for (std::size_t i = 0; i < payload.size(); ++i) {
    if (!std::isfinite(payload[i]))
      throw DataError(path + ": non-finite checkpoint value");
    ck.params.theta[i] = static_cast<double>(payload[i]);
  }
  return ck;
}

std::string log_to_json(const TrainResult& result) {
  nlohmann::ordered_json j;
  j["best_epoch"] = result.best_epoch;
  j["best_val_de76"] = result.best_val;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const EpochLog& e : result.log)
    rows.push_back({{"epoch", e.epoch},
                    {"lr", e.lr},
                    {"train_de76", e.train_loss},
                    {"val_de76", e.val_metric}});
  j["epochs"] = std::move(rows);
  return j.dump(2) + "\n";
}

}  // namespace kan
}  // namespace mscc
