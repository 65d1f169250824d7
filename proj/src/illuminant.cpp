#include "mscc/illuminant.hpp"

#include <algorithm>
#include <cmath>

#include "mscc/common.hpp"

namespace mscc {

void EstimatorSpec::validate() const {
  if (derivative_order < 0 || derivative_order > 2)
    throw ConfigError("estimator: derivative order must be 0, 1, or 2");
  if (!p_is_infinite() && !(minkowski_p >= 1.0))
    throw ConfigError("estimator: Minkowski p must be >= 1 or infinity");
  if (smoothing_sigma < 0.0)
    throw ConfigError("estimator: sigma must be non-negative");
  if (derivative_order > 0 && smoothing_sigma <= 0.0)
    throw ConfigError("estimator: derivative orders require sigma > 0");
}

EstimatorSpec estimator_preset(const std::string& name) {
  const double inf = std::numeric_limits<double>::infinity();
  if (name == "gw") return {0, 1.0, 0.0, "gw"};
  if (name == "wp") return {0, inf, 0.0, "wp"};
  if (name == "sog") return {0, 4.0, 0.0, "sog"};
  if (name == "ggw") return {0, 4.0, 9.0, "ggw"};
  if (name == "ge1") return {1, 1.0, 6.0, "ge1"};
  if (name == "ge2") return {2, 1.0, 1.0, "ge2"};
  throw ConfigError("unknown estimator preset: " + name);
}

IlluminantEstimate normalize_estimate(const std::vector<double>& raw) {
  double norm2 = 0.0;
  for (double v : raw) norm2 += v * v;
  if (norm2 == 0.0) throw NumericError("illuminant estimate: degenerate (all-zero) response");
  double norm = std::sqrt(norm2);
  IlluminantEstimate est;
  est.raw_magnitude = norm;
  est.rgb.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) est.rgb[i] = raw[i] / norm;
  return est;
}

namespace {

struct Kernel1d {
  std::vector<double> taps;  // centered, radius r
  int radius = 0;
};

// Sampled Gaussian normalized to unit sum; derivative taps reuse the
// normalized base so the scale convention is shared with the test oracle.
Kernel1d gaussian_taps(double sigma, int derivative) {
  Kernel1d k;
  k.radius = static_cast<int>(std::ceil(3.0 * sigma));
  k.taps.resize(2 * k.radius + 1);
  double sum = 0.0;
  for (int i = -k.radius; i <= k.radius; ++i) {
    double g = std::exp(-0.5 * i * i / (sigma * sigma));
    k.taps[i + k.radius] = g;
    sum += g;
  }
  for (double& t : k.taps) t /= sum;
  if (derivative == 1) {
    for (int i = -k.radius; i <= k.radius; ++i)
      k.taps[i + k.radius] *= -i / (sigma * sigma);
  } else if (derivative == 2) {
    for (int i = -k.radius; i <= k.radius; ++i)
      k.taps[i + k.radius] *=
          (static_cast<double>(i) * i / (sigma * sigma) - 1.0) / (sigma * sigma);
    // The sampled taps do not sum to zero exactly (truncation plus the
    // discrete-vs-continuous variance gap); recenter so constants are
    // annihilated like they are for the analytic operator.
    double mean = 0.0;
    for (double t : k.taps) mean += t;
    mean /= static_cast<double>(k.taps.size());
    for (double& t : k.taps) t -= mean;
  }
  return k;
}

int clamp_coord(int v, int n) { return std::clamp(v, 0, n - 1); }

// Separable convolution with replicate borders, one channel plane.
std::vector<double> convolve_separable(const double* src, int h, int w,
                                       const Kernel1d& kx, const Kernel1d& ky) {
  std::vector<double> tmp(static_cast<std::size_t>(h) * w, 0.0);
  std::vector<double> out(static_cast<std::size_t>(h) * w, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -kx.radius; i <= kx.radius; ++i)
        s += kx.taps[i + kx.radius] * src[y * w + clamp_coord(x + i, w)];
      tmp[static_cast<std::size_t>(y) * w + x] = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -ky.radius; i <= ky.radius; ++i)
        s += ky.taps[i + ky.radius] * tmp[static_cast<std::size_t>(clamp_coord(y + i, h)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = s;
    }
  return out;
}

}  // namespace

PlanarImage gaussian_derivative(const PlanarImage& img, double sigma, int order) {
  if (order < 0 || order > 2)
    throw ConfigError("gaussian derivative: order must be 0, 1, or 2");
  if (order > 0 && sigma <= 0.0)
    throw ConfigError("gaussian derivative: order > 0 requires sigma > 0");
  if (order == 0 && sigma == 0.0) return img;

  Kernel1d g0 = gaussian_taps(sigma, 0);
  PlanarImage out(img.height, img.width, img.channels(), img.space);
  out.mask = img.mask;
  const std::size_t plane = img.plane_size();
  for (int c = 0; c < img.channels(); ++c) {
    const double* src = &img.data[static_cast<std::size_t>(c) * plane];
    double* dst = &out.data[static_cast<std::size_t>(c) * plane];
    if (order == 0) {
      auto blurred = convolve_separable(src, img.height, img.width, g0, g0);
      std::copy(blurred.begin(), blurred.end(), dst);
    } else if (order == 1) {
      Kernel1d g1 = gaussian_taps(sigma, 1);
      auto dx = convolve_separable(src, img.height, img.width, g1, g0);
      auto dy = convolve_separable(src, img.height, img.width, g0, g1);
      for (std::size_t i = 0; i < plane; ++i)
        dst[i] = std::hypot(dx[i], dy[i]);
    } else {
      Kernel1d g1 = gaussian_taps(sigma, 1);
      Kernel1d g2 = gaussian_taps(sigma, 2);
      auto dxx = convolve_separable(src, img.height, img.width, g2, g0);
      auto dyy = convolve_separable(src, img.height, img.width, g0, g2);
      auto dxy = convolve_separable(src, img.height, img.width, g1, g1);
      for (std::size_t i = 0; i < plane; ++i)
        dst[i] = std::sqrt(dxx[i] * dxx[i] + 2.0 * dxy[i] * dxy[i] + dyy[i] * dyy[i]);
    }
  }
  return out;
}

IlluminantEstimate minkowski_estimate(const PlanarImage& img,
                                      const EstimatorSpec& spec,
                                      double full_scale) {
  spec.validate();
  if (img.space != ColorSpace::CameraRaw)
    throw DataError("minkowski estimate: image must be camera-raw");

  std::vector<std::uint8_t> use = img.mask;
  if (full_scale > 0.0) {
    const double clip = 0.98 * full_scale;
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        if (!use[static_cast<std::size_t>(y) * img.width + x]) continue;
        for (int c = 0; c < img.channels(); ++c)
          if (img.at(c, y, x) >= clip) {
            use[static_cast<std::size_t>(y) * img.width + x] = 0;
            break;
          }
      }
  }

  PlanarImage filtered =
      gaussian_derivative(img, spec.smoothing_sigma, spec.derivative_order);

  std::vector<double> raw(img.channels(), 0.0);
  std::size_t n = 0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (use[static_cast<std::size_t>(y) * img.width + x]) ++n;
  if (n == 0) throw DataError("minkowski estimate: empty valid mask");

  for (int c = 0; c < img.channels(); ++c) {
    if (spec.p_is_infinite()) {
      double mx = 0.0;
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
          if (use[static_cast<std::size_t>(y) * img.width + x])
            mx = std::max(mx, std::abs(filtered.at(c, y, x)));
      raw[c] = mx;
    } else {
      KahanSum sum;
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
          if (use[static_cast<std::size_t>(y) * img.width + x])
            sum.add(std::pow(std::abs(filtered.at(c, y, x)), spec.minkowski_p));
      raw[c] = std::pow(sum.value() / static_cast<double>(n), 1.0 / spec.minkowski_p);
    }
  }
  return normalize_estimate(raw);
}

}  // namespace mscc
