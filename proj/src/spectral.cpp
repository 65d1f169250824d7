#include "mscc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mscc {

WavelengthGrid::WavelengthGrid(double lo, double hi, double step_nm) {
  if (!(lo < hi)) throw ConfigError("wavelength grid: lambda_min must be < lambda_max");
  if (!(step_nm > 0.0)) throw ConfigError("wavelength grid: step must be positive");
  lambda_min = lo;
  lambda_max = hi;
  step = step_nm;
  count = static_cast<int>(std::lround((hi - lo) / step_nm)) + 1;
  if (count < 1) throw ConfigError("wavelength grid: empty grid");
}

Spectrum::Spectrum(const WavelengthGrid& g, std::vector<double> v, std::string n)
    : grid(g), values(std::move(v)), name(std::move(n)) {
  if (static_cast<int>(values.size()) != grid.count)
    throw DataError("spectrum: sample count does not match grid");
  for (double x : values)
    if (!(x >= 0.0) || !std::isfinite(x))
      throw DataError("spectrum: values must be finite and non-negative");
}

void SensitivitySet::validate() const {
  if (channels.empty()) throw DataError("sensitivities: no channels");
  for (const auto& ch : channels) {
    if (static_cast<int>(ch.size()) != grid.count)
      throw DataError("sensitivities: sample count does not match grid");
    bool any_positive = false;
    for (double x : ch) {
      if (!(x >= 0.0) || !std::isfinite(x))
        throw DataError("sensitivities: values must be finite and non-negative");
      if (x > 0.0) any_positive = true;
    }
    if (!any_positive)
      throw DataError("sensitivities: channel has no positive sample");
  }
}

const char* color_space_name(ColorSpace cs) {
  switch (cs) {
    case ColorSpace::CameraRaw: return "camera-raw";
    case ColorSpace::MsRaw: return "ms-raw";
    case ColorSpace::Xyz: return "xyz";
    case ColorSpace::Lab: return "lab";
    case ColorSpace::SrgbEncoded: return "srgb-encoded";
  }
  return "unknown";
}

PlanarImage::PlanarImage(int h, int w, int c, ColorSpace cs)
    : height(h), width(w), space(cs),
      data(static_cast<std::size_t>(c) * h * w, 0.0),
      mask(static_cast<std::size_t>(h) * w, 1),
      channels_(c) {
  if (h <= 0 || w <= 0 || c <= 0)
    throw ConfigError("image: dimensions must be positive");
}

std::vector<double> PlanarImage::pixel(int y, int x) const {
  std::vector<double> v(channels_);
  for (int c = 0; c < channels_; ++c) v[c] = at(c, y, x);
  return v;
}

void PlanarImage::set_pixel(int y, int x, const std::vector<double>& v) {
  for (int c = 0; c < channels_; ++c) at(c, y, x) = v[c];
}

ReflectanceCube::ReflectanceCube(int h, int w, const WavelengthGrid& g)
    : height(h), width(w), grid(g),
      planes(static_cast<std::size_t>(g.count) * h * w, 0.0),
      mask(static_cast<std::size_t>(h) * w, 1) {
  if (h <= 0 || w <= 0) throw ConfigError("cube: dimensions must be positive");
}

void ReflectanceCube::validate() const {
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      if (!valid(y, x)) continue;
      for (int b = 0; b < grid.count; ++b) {
        double r = at(b, y, x);
        if (!std::isfinite(r) || r < 0.0 || r > 1.0)
          throw DataError("cube: reflectance outside [0,1] on a valid pixel");
      }
    }
}

namespace {

// Piecewise-linear evaluation over strictly increasing nodes, clamped at the
// edges.
double interp_clamped(const std::vector<double>& xs,
                      const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  std::size_t lo = hi - 1;
  double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + t * (ys[hi] - ys[lo]);
}

std::vector<double> resample_values(const std::vector<double>& xs,
                                    const std::vector<double>& ys,
                                    const WavelengthGrid& target) {
  if (xs.size() < 1 || xs.size() != ys.size())
    throw DataError("resample: empty or inconsistent source");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1]))
      throw DataError("resample: wavelengths must be strictly increasing");
  if (xs.back() < target.lambda_min || xs.front() > target.lambda_max)
    throw DataError("resample: no overlap between source and target ranges");
  std::vector<double> out(target.count);
  for (int i = 0; i < target.count; ++i)
    out[i] = interp_clamped(xs, ys, target.wavelength(i));
  return out;
}

}  // namespace

Spectrum resample_spectrum(const Spectrum& spec, const WavelengthGrid& target) {
  if (spec.grid == target) return spec;
  std::vector<double> xs(spec.grid.count);
  for (int i = 0; i < spec.grid.count; ++i) xs[i] = spec.grid.wavelength(i);
  return Spectrum(target, resample_values(xs, spec.values, target), spec.name);
}

Spectrum resample_spectrum(const SampledSpectrum& spec,
                           const WavelengthGrid& target,
                           const std::string& name) {
  return Spectrum(target, resample_values(spec.wavelengths, spec.values, target),
                  name);
}

SensitivitySet resample_sensitivities(const SensitivitySet& sens,
                                      const WavelengthGrid& target) {
  if (sens.grid == target) return sens;
  std::vector<double> xs(sens.grid.count);
  for (int i = 0; i < sens.grid.count; ++i) xs[i] = sens.grid.wavelength(i);
  SensitivitySet out;
  out.grid = target;
  out.channel_names = sens.channel_names;
  out.channels.reserve(sens.channels.size());
  for (const auto& ch : sens.channels)
    out.channels.push_back(resample_values(xs, ch, target));
  return out;
}

PlanarImage render_image(const ReflectanceCube& cube, const Spectrum& illum,
                         const SensitivitySet& sens, ColorSpace tag) {
  if (cube.grid != illum.grid || cube.grid != sens.grid)
    throw DataError("render: cube, illuminant, and sensitivities must share a grid");
  if (tag != ColorSpace::CameraRaw && tag != ColorSpace::MsRaw &&
      tag != ColorSpace::Xyz)
    throw ConfigError("render: output tag must be a linear sensor space");
  const int bands = cube.grid.count;
  const int nch = sens.channel_count();
  // Per-channel weights E_b * S_cb * dl folded once.
  std::vector<double> w(static_cast<std::size_t>(nch) * bands);
  for (int c = 0; c < nch; ++c)
    for (int b = 0; b < bands; ++b)
      w[static_cast<std::size_t>(c) * bands + b] =
          illum.values[b] * sens.channels[c][b] * cube.grid.step;

  PlanarImage img(cube.height, cube.width, nch, tag);
  img.mask = cube.mask;
  const std::size_t plane = img.plane_size();
  for (int c = 0; c < nch; ++c) {
    const double* wc = &w[static_cast<std::size_t>(c) * bands];
    double* out = &img.data[static_cast<std::size_t>(c) * plane];
    for (int b = 0; b < bands; ++b) {
      const double* rb = &cube.planes[static_cast<std::size_t>(b) * plane];
      const double wb = wc[b];
      for (std::size_t i = 0; i < plane; ++i) out[i] += wb * rb[i];
    }
  }
  return img;
}

std::vector<double> flat_field_color(const Spectrum& illum,
                                     const SensitivitySet& sens) {
  if (illum.grid != sens.grid)
    throw DataError("flat-field: illuminant and sensitivities must share a grid");
  std::vector<double> out(sens.channel_count(), 0.0);
  for (int c = 0; c < sens.channel_count(); ++c)
    for (int b = 0; b < illum.grid.count; ++b)
      out[c] += illum.values[b] * sens.channels[c][b] * illum.grid.step;
  return out;
}

PlanarImage downsample_area(const PlanarImage& img, int factor) {
  if (factor < 1) throw ConfigError("downsample: factor must be >= 1");
  if (img.height % factor != 0 || img.width % factor != 0)
    throw DataError("downsample: dimensions not divisible by factor");
  if (factor == 1) return img;
  const int oh = img.height / factor;
  const int ow = img.width / factor;
  PlanarImage out(oh, ow, img.channels(), img.space);
  const double inv = 1.0 / (static_cast<double>(factor) * factor);
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        double s = 0.0;
        for (int dy = 0; dy < factor; ++dy)
          for (int dx = 0; dx < factor; ++dx)
            s += img.at(c, y * factor + dy, x * factor + dx);
        out.at(c, y, x) = s * inv;
      }
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      bool all_valid = true;
      for (int dy = 0; dy < factor && all_valid; ++dy)
        for (int dx = 0; dx < factor; ++dx)
          if (!img.valid(y * factor + dy, x * factor + dx)) {
            all_valid = false;
            break;
          }
      out.mask[static_cast<std::size_t>(y) * ow + x] = all_valid ? 1 : 0;
    }
  return out;
}

PlanarImage scale_exposure(const PlanarImage& img, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("scale-exposure: alpha must be positive");
  if (img.space == ColorSpace::Lab || img.space == ColorSpace::SrgbEncoded)
    throw ConfigError("scale-exposure: image must be in a linear color space");
  PlanarImage out = img;
  if (alpha == 1.0) return out;
  for (double& v : out.data) v *= alpha;
  return out;
}

std::vector<double> gaussian_channel(const WavelengthGrid& grid, double center,
                                     double fwhm) {
  // FWHM = 2 sqrt(2 ln 2) sigma.
  const double sigma = fwhm / 2.3548200450309493;
  std::vector<double> out(grid.count);
  for (int i = 0; i < grid.count; ++i) {
    double d = grid.wavelength(i) - center;
    out[i] = std::exp(-0.5 * d * d / (sigma * sigma));
  }
  return out;
}

Spectrum blackbody_spd(const WavelengthGrid& grid, double temperature_k) {
  if (!(temperature_k > 0.0))
    throw ConfigError("blackbody: temperature must be positive");
  constexpr double h = 6.62607015e-34;
  constexpr double c = 2.99792458e8;
  constexpr double kb = 1.380649e-23;
  std::vector<double> v(grid.count);
  for (int i = 0; i < grid.count; ++i) {
    double lm = grid.wavelength(i) * 1e-9;
    double expo = h * c / (lm * kb * temperature_k);
    v[i] = (2.0 * h * c * c) / (std::pow(lm, 5) * (std::exp(expo) - 1.0));
  }
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= grid.count;
  for (double& x : v) x /= mean;
  char name[32];
  std::snprintf(name, sizeof(name), "bb%d", static_cast<int>(std::lround(temperature_k)));
  return Spectrum(grid, std::move(v), name);
}

}  // namespace mscc
