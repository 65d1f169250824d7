#include "mscc/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "mscc/cie_data.hpp"
#include "mscc/rng.hpp"

namespace mscc {

void HomographyParams::validate() const {
  if (max_translation < 0.0 || max_rotation < 0.0 || scale_jitter < 0.0 ||
      max_perspective < 0.0)
    throw ConfigError("homography params: bounds must be non-negative");
}

ReflectanceCube synth_scene(std::uint64_t seed, int h, int w,
                            const WavelengthGrid& grid, int n_blobs,
                            bool white_patch) {
  if (h < 8 || w < 8) throw ConfigError("synth scene: minimum size is 8x8");
  if (n_blobs < 1) throw ConfigError("synth scene: need at least one blob");
  Rng rng(seed);

  struct Blob {
    double cy, cx, spatial_sigma, amp, lambda_center, lambda_sigma;
  };
  std::vector<Blob> blobs(n_blobs);
  for (Blob& b : blobs) {
    b.cy = rng.uniform(0.0, h);
    b.cx = rng.uniform(0.0, w);
    b.spatial_sigma = rng.uniform(0.10, 0.30) * std::min(h, w);
    b.amp = rng.uniform(0.30, 1.00);
    b.lambda_center = rng.uniform(grid.lambda_min, grid.lambda_max);
    b.lambda_sigma = rng.uniform(30.0, 80.0);
  }
  const double base = rng.uniform(0.05, 0.15);

  ReflectanceCube cube(h, w, grid);
  std::vector<double> spatial(static_cast<std::size_t>(n_blobs) * h * w);
  for (int k = 0; k < n_blobs; ++k) {
    const Blob& b = blobs[k];
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double dy = (y - b.cy) / b.spatial_sigma;
        double dx = (x - b.cx) / b.spatial_sigma;
        spatial[(static_cast<std::size_t>(k) * h + y) * w + x] =
            b.amp * std::exp(-0.5 * (dy * dy + dx * dx));
      }
  }
  for (int bidx = 0; bidx < grid.count; ++bidx) {
    double lambda = grid.wavelength(bidx);
    for (int k = 0; k < n_blobs; ++k) {
      const Blob& b = blobs[k];
      double dl = (lambda - b.lambda_center) / b.lambda_sigma;
      double spectral = std::exp(-0.5 * dl * dl);
      const double* sp = &spatial[static_cast<std::size_t>(k) * h * w];
      double* plane = &cube.planes[static_cast<std::size_t>(bidx) * h * w];
      for (std::size_t i = 0; i < static_cast<std::size_t>(h) * w; ++i)
        plane[i] += sp[i] * spectral;
    }
    double* plane = &cube.planes[static_cast<std::size_t>(bidx) * h * w];
    for (std::size_t i = 0; i < static_cast<std::size_t>(h) * w; ++i)
      plane[i] = std::clamp(plane[i] + base, 0.02, 0.98);
  }

  if (white_patch) {
    // Flat bright reference patch, excluded from all statistics downstream.
    const int ph = h / 8;
    const int pw = w / 8;
    for (int y = 0; y < ph; ++y)
      for (int x = 0; x < pw; ++x) {
        for (int bidx = 0; bidx < grid.count; ++bidx)
          cube.at(bidx, y, x) = 0.95;
        cube.mask[static_cast<std::size_t>(y) * w + x] = 0;
      }
  }
  return cube;
}

Triplet generate_triplet(const SceneRecord& scene, const Spectrum& illum,
                         const CameraProfile& camera,
                         const SensitivitySet& ms_sens,
                         const SensitivitySet& cmf, const Spectrum& d65,
                         int ms_factor) {
  const ReflectanceCube& cube = scene.cube;
  if (cube.grid != illum.grid || cube.grid != camera.sensitivities.grid ||
      cube.grid != ms_sens.grid || cube.grid != cmf.grid ||
      cube.grid != d65.grid)
    throw DataError("generate triplet: all spectral inputs must share the cube grid");
  if (ms_factor < 1 || cube.height % ms_factor != 0 ||
      cube.width % ms_factor != 0)
    throw DataError("generate triplet: dimensions not divisible by ms factor");

  Triplet t;
  t.rgb = render_image(cube, illum, camera.sensitivities, ColorSpace::CameraRaw);
  t.ms = downsample_area(render_image(cube, illum, ms_sens, ColorSpace::MsRaw),
                         ms_factor);
  t.gt = render_image(cube, d65, cmf, ColorSpace::Xyz);
  t.meta.scene_id = scene.scene_id;
  t.meta.illuminant = illum.name;
  t.meta.camera = camera.name;
  t.meta.gt_illuminant_rgb = flat_field_color(illum, camera.sensitivities);
  return t;
}

SplitManifest make_splits(const std::vector<std::string>& scene_ids,
                          std::uint64_t seed) {
  const std::size_t n = scene_ids.size();
  if (n < 5) throw DataError("splits: need at least 5 scenes");
  std::vector<std::string> order = scene_ids;
  Rng rng(seed);
  // Fisher-Yates with the portable RNG.
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = rng.uniform_index(i + 1);
    std::swap(order[i], order[j]);
  }
  const std::size_t n_test =
      static_cast<std::size_t>(std::lround(0.20 * static_cast<double>(n)));
  const std::size_t pool = n - n_test;
  const std::size_t n_val =
      static_cast<std::size_t>(std::lround(0.20 * static_cast<double>(pool)));
  SplitManifest m;
  m.seed = seed;
  m.test.assign(order.begin(), order.begin() + n_test);
  m.val.assign(order.begin() + n_test, order.begin() + n_test + n_val);
  m.train.assign(order.begin() + n_test + n_val, order.end());
  return m;
}

Mat3 sample_homography(const HomographyParams& params, std::uint64_t index,
                       int height, int width) {
  params.validate();
  Rng rng(mix_seed(params.seed, index));
  const double cx = (width - 1) / 2.0;
  const double cy = (height - 1) / 2.0;

  for (int attempt = 0; attempt < 16; ++attempt) {
    double tx = rng.uniform(-params.max_translation, params.max_translation);
    double ty = rng.uniform(-params.max_translation, params.max_translation);
    double theta = rng.uniform(-params.max_rotation, params.max_rotation) *
                   3.14159265358979323846 / 180.0;
    double s = 1.0 + rng.uniform(-params.scale_jitter, params.scale_jitter);
    double p1 = rng.uniform(-params.max_perspective, params.max_perspective);
    double p2 = rng.uniform(-params.max_perspective, params.max_perspective);

    Mat3 m;
    m.m = {s * std::cos(theta), -s * std::sin(theta), tx,
           s * std::sin(theta), s * std::cos(theta),  ty,
           p1,                  p2,                   1.0};
    Mat3 center = Mat3::identity();
    center(0, 2) = cx;
    center(1, 2) = cy;
    Mat3 uncenter = Mat3::identity();
    uncenter(0, 2) = -cx;
    uncenter(1, 2) = -cy;
    Mat3 h = center * m * uncenter;
    if (h(2, 2) == 0.0) continue;
    double inv = 1.0 / h(2, 2);
    for (double& v : h.m) v *= inv;
    if (std::abs(h.det()) > 1e-6) return h;
  }
  throw NumericError("homography sampling: degenerate after bounded retries");
}

PlanarImage warp_ms(const PlanarImage& ms, const Mat3& h) {
  Mat3 hinv = h.inverse();  // throws on singular input
  PlanarImage out(ms.height, ms.width, ms.channels(), ms.space);
  const int W = ms.width;
  const int H = ms.height;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      Vec3 q = hinv.apply({static_cast<double>(x), static_cast<double>(y), 1.0});
      if (q[2] == 0.0) {
        out.mask[static_cast<std::size_t>(y) * W + x] = 0;
        continue;
      }
      double sx = q[0] / q[2];
      double sy = q[1] / q[2];
      bool inside = sx >= 0.0 && sx <= W - 1 && sy >= 0.0 && sy <= H - 1;

      double cxs = std::clamp(sx, 0.0, static_cast<double>(W - 1));
      double cys = std::clamp(sy, 0.0, static_cast<double>(H - 1));
      int x0 = static_cast<int>(std::floor(cxs));
      int y0 = static_cast<int>(std::floor(cys));
      int x1 = std::min(x0 + 1, W - 1);
      int y1 = std::min(y0 + 1, H - 1);
      double fx = cxs - x0;
      double fy = cys - y0;
      for (int c = 0; c < ms.channels(); ++c) {
        double v00 = ms.at(c, y0, x0);
        double v01 = ms.at(c, y0, x1);
        double v10 = ms.at(c, y1, x0);
        double v11 = ms.at(c, y1, x1);
        out.at(c, y, x) = (1 - fy) * ((1 - fx) * v00 + fx * v01) +
                          fy * ((1 - fx) * v10 + fx * v11);
      }
      int nx = static_cast<int>(std::lround(cxs));
      int ny = static_cast<int>(std::lround(cys));
      bool src_valid = ms.valid(ny, nx);
      out.mask[static_cast<std::size_t>(y) * W + x] =
          (inside && src_valid) ? 1 : 0;
    }
  return out;
}

SensitivitySet normalize_exposure(const SensitivitySet& sens) {
  Spectrum unit(sens.grid, std::vector<double>(sens.grid.count, 1.0), "e");
  std::vector<double> ff = flat_field_color(unit, sens);
  double mean = 0.0;
  for (double v : ff) mean += v;
  mean /= static_cast<double>(ff.size());
  if (!(mean > 0.0)) throw DataError("exposure normalization: zero response");
  SensitivitySet out = sens;
  for (auto& ch : out.channels)
    for (double& v : ch) v /= mean;
  return out;
}

SensitivitySet normalize_xyz_luminance(const SensitivitySet& cmf,
                                       const Spectrum& d65) {
  if (cmf.channel_count() != 3)
    throw ConfigError("luminance normalization: need X,Y,Z channels");
  double y_white = flat_field_color(d65, cmf)[1];
  if (!(y_white > 0.0))
    throw DataError("luminance normalization: zero white luminance");
  SensitivitySet out = cmf;
  for (auto& ch : out.channels)
    for (double& v : ch) v /= y_white;
  return out;
}

SensitivitySet gaussian_ms_sensitivities(const WavelengthGrid& grid) {
  SensitivitySet s;
  s.grid = grid;
  for (int k = 0; k < 15; ++k) {
    double center = 410.0 + 20.0 * k;
    s.channels.push_back(gaussian_channel(grid, center, 25.0));
    s.channel_names.push_back("ms" + std::to_string(k));
  }
  s.validate();
  return s;
}

SensitivitySet default_rgb_sensitivities(const WavelengthGrid& grid) {
  SensitivitySet s;
  s.grid = grid;
  s.channels = {
      gaussian_channel(grid, 600.0, 70.0),
      gaussian_channel(grid, 540.0, 70.0),
      gaussian_channel(grid, 460.0, 60.0),
  };
  s.channel_names = {"r", "g", "b"};
  s.validate();
  return s;
}

namespace {

Spectrum fluorescent_spd(const WavelengthGrid& grid, int variant) {
  struct Spike {
    double center, width, amp;
  };
  static const std::vector<Spike> fl1 = {
      {436, 8, 1.2}, {546, 8, 1.8}, {611, 10, 1.4}};
  static const std::vector<Spike> fl2 = {{405, 8, 0.7},  {436, 8, 1.0},
                                         {487, 10, 0.8}, {543, 8, 1.5},
                                         {588, 10, 1.1}, {611, 8, 1.3}};
  const auto& spikes = variant == 0 ? fl1 : fl2;
  const double base = variant == 0 ? 0.18 : 0.15;
  std::vector<double> v(grid.count, base);
  for (const Spike& sp : spikes)
    for (int i = 0; i < grid.count; ++i) {
      double d = (grid.wavelength(i) - sp.center) / sp.width;
      v[i] += sp.amp * std::exp(-0.5 * d * d);
    }
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= grid.count;
  for (double& x : v) x /= mean;
  return Spectrum(grid, std::move(v), variant == 0 ? "fl1" : "fl2");
}

}  // namespace

std::vector<Spectrum> default_illuminant_bank(const WavelengthGrid& grid,
                                              int count) {
  if (count < 3) throw ConfigError("illuminant bank: need at least 3 entries");
  std::vector<Spectrum> bank;
  {
    // Unit-mean like every other bank entry so exposures are comparable.
    Spectrum d65 = cie_d65(grid);
    double mean = 0.0;
    for (double v : d65.values) mean += v;
    mean /= grid.count;
    for (double& v : d65.values) v /= mean;
    bank.push_back(std::move(d65));
  }
  bank.push_back(fluorescent_spd(grid, 0));
  bank.push_back(fluorescent_spd(grid, 1));
  const int n_bb = count - 3;
  // Blackbodies evenly spaced in mired between 2500 K and 7500 K.
  const double m_lo = 1e6 / 7500.0;
  const double m_hi = 1e6 / 2500.0;
  for (int i = 0; i < n_bb; ++i) {
    double t = n_bb == 1 ? 0.5 : static_cast<double>(i) / (n_bb - 1);
    double mired = m_lo + t * (m_hi - m_lo);
    bank.push_back(blackbody_spd(grid, 1e6 / mired));
  }
  if (static_cast<int>(bank.size()) > count) bank.resize(count);
  return bank;
}

}  // namespace mscc
