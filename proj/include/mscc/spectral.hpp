#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mscc/common.hpp"

namespace mscc {

/// Uniform wavelength grid in nanometers. All spectra, sensitivities, and
/// reflectance cubes carry one of these; operations that combine them demand
/// an exact grid match (resample first).
struct WavelengthGrid {
  double lambda_min = 400.0;
  double lambda_max = 700.0;
  double step = 10.0;
  int count = 31;

  WavelengthGrid() = default;
  WavelengthGrid(double lo, double hi, double step_nm);

  double wavelength(int i) const { return lambda_min + step * i; }
  bool operator==(const WavelengthGrid& o) const {
    return lambda_min == o.lambda_min && lambda_max == o.lambda_max &&
           step == o.step && count == o.count;
  }
  bool operator!=(const WavelengthGrid& o) const { return !(*this == o); }
};

/// Nonuniformly sampled spectrum as read from CSV; strictly increasing
/// wavelengths. Resample onto a WavelengthGrid before use.
struct SampledSpectrum {
  std::vector<double> wavelengths;
  std::vector<double> values;
};

/// Spectral power distribution (or any per-wavelength scalar) on a grid.
struct Spectrum {
  WavelengthGrid grid;
  std::vector<double> values;
  std::string name;

  Spectrum() = default;
  Spectrum(const WavelengthGrid& g, std::vector<double> v, std::string n = "");
};

/// Per-channel spectral sensitivities sharing one grid.
struct SensitivitySet {
  WavelengthGrid grid;
  std::vector<std::vector<double>> channels;
  std::vector<std::string> channel_names;

  int channel_count() const { return static_cast<int>(channels.size()); }
  void validate() const;
};

/// Multi-column spectral data (reflectance charts share the sensitivity
/// layout and CSV format).
using SpectralTable = SensitivitySet;

enum class ColorSpace : std::uint8_t {
  CameraRaw = 0,
  MsRaw = 1,
  Xyz = 2,
  Lab = 3,
  SrgbEncoded = 4,
};

const char* color_space_name(ColorSpace cs);

/// Linear multichannel raster. Planes are stored channel-major, each plane
/// row-major. The validity mask is shared across channels.
struct PlanarImage {
  int height = 0;
  int width = 0;
  ColorSpace space = ColorSpace::CameraRaw;
  std::vector<double> data;        // size = channels * height * width
  std::vector<std::uint8_t> mask;  // size = height * width, 1 = valid
  int channels_ = 0;

  PlanarImage() = default;
  PlanarImage(int h, int w, int c, ColorSpace cs);

  int channels() const { return channels_; }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(height) * width;
  }
  double& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  bool valid(int y, int x) const {
    return mask[static_cast<std::size_t>(y) * width + x] != 0;
  }
  std::vector<double> pixel(int y, int x) const;
  void set_pixel(int y, int x, const std::vector<double>& v);
};

/// H x W x B surface reflectance in [0,1] plus a validity mask.
struct ReflectanceCube {
  int height = 0;
  int width = 0;
  WavelengthGrid grid;
  std::vector<double> planes;      // size = grid.count * height * width
  std::vector<std::uint8_t> mask;  // size = height * width

  ReflectanceCube() = default;
  ReflectanceCube(int h, int w, const WavelengthGrid& g);

  double& at(int b, int y, int x) {
    return planes[(static_cast<std::size_t>(b) * height + y) * width + x];
  }
  double at(int b, int y, int x) const {
    return planes[(static_cast<std::size_t>(b) * height + y) * width + x];
  }
  bool valid(int y, int x) const {
    return mask[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void validate() const;
};

/// Piecewise-linear resampling with clamp-to-edge extrapolation. Throws
/// DataError when the source and target ranges do not overlap.
Spectrum resample_spectrum(const Spectrum& spec, const WavelengthGrid& target);
Spectrum resample_spectrum(const SampledSpectrum& spec,
                           const WavelengthGrid& target,
                           const std::string& name = "");
SensitivitySet resample_sensitivities(const SensitivitySet& sens,
                                      const WavelengthGrid& target);

/// Discrete image formation: I_c(x,y) = sum_b R_b(x,y) * E_b * S_cb * dl.
/// Cube, illuminant, and sensitivities must share one grid.
PlanarImage render_image(const ReflectanceCube& cube, const Spectrum& illum,
                         const SensitivitySet& sens, ColorSpace tag);

/// Camera response to a perfect reflector: sum_b E_b * S_cb * dl per channel.
std::vector<double> flat_field_color(const Spectrum& illum,
                                     const SensitivitySet& sens);

/// Block-mean downsampling by an integer factor; an output pixel is valid
/// only when every source pixel in its block is valid.
PlanarImage downsample_area(const PlanarImage& img, int factor);

/// Multiplies every channel value by alpha. Rejects non-linear color spaces.
PlanarImage scale_exposure(const PlanarImage& img, double alpha);

/// Gaussian channel profile, exp(-(l-center)^2 / (2 sigma^2)) with sigma
/// derived from full width at half maximum.
std::vector<double> gaussian_channel(const WavelengthGrid& grid, double center,
                                     double fwhm);

/// Planck blackbody SPD at temperature_k, normalized to unit mean.
Spectrum blackbody_spd(const WavelengthGrid& grid, double temperature_k);

}  // namespace mscc
