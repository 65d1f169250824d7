#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mscc/mat3.hpp"
#include "mscc/pipeline.hpp"
#include "mscc/spectral.hpp"

namespace mscc {

struct SceneRecord {
  std::string scene_id;
  ReflectanceCube cube;
  std::string source = "synthetic";
  std::string mask_note;
};

struct TripletMeta {
  std::string scene_id;
  std::string illuminant;
  std::string camera;
  std::vector<double> gt_illuminant_rgb;  // flat-field color under the camera
  std::array<double, 9> homography = {1, 0, 0, 0, 1, 0, 0, 0, 1};
};

struct Triplet {
  PlanarImage rgb;  // camera-raw, full resolution
  PlanarImage ms;   // ms-raw, downsampled
  PlanarImage gt;   // xyz under D65, full resolution
  TripletMeta meta;
};

struct SplitManifest {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
};

struct HomographyParams {
  double max_translation = 2.0;  // MS pixels
  double max_rotation = 1.0;     // degrees
  double scale_jitter = 0.02;    // fraction
  double max_perspective = 1e-4;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Smooth random reflectance scene: Gaussian blobs in space, Gaussian bumps
/// in wavelength, clipped to [0.02, 0.98]. When `white_patch` is set, a flat
/// bright reference patch is written into the top-left corner and masked
/// out, mirroring how calibration patches are handled upstream.
ReflectanceCube synth_scene(std::uint64_t seed, int h, int w,
                            const WavelengthGrid& grid, int n_blobs,
                            bool white_patch = true);

/// Renders one aligned triplet. All spectral inputs must share the cube grid.
Triplet generate_triplet(const SceneRecord& scene, const Spectrum& illum,
                         const CameraProfile& camera,
                         const SensitivitySet& ms_sens,
                         const SensitivitySet& cmf, const Spectrum& d65,
                         int ms_factor);

/// Scene-wise split: 20% test, then 20% of the remaining pool to val.
SplitManifest make_splits(const std::vector<std::string>& scene_ids,
                          std::uint64_t seed);

/// Random homography about the image center, deterministic in (seed, index),
/// normalized so the bottom-right entry is 1.
Mat3 sample_homography(const HomographyParams& params, std::uint64_t index,
                       int height, int width);

/// Inverse-mapping bilinear warp with replicate borders. The mask is warped
/// nearest-neighbor and intersected with the in-bounds test.
PlanarImage warp_ms(const PlanarImage& ms, const Mat3& h);

/// Divides every channel by the mean flat-field response under a flat unit
/// SPD: a fixed per-sensor exposure gain that brings raw renders to order
/// one without touching channel ratios.
SensitivitySet normalize_exposure(const SensitivitySet& sens);

/// Scales the color-matching functions so a perfect reflector under `d65`
/// renders to Y = 1 (relative colorimetry against the D65 white).
SensitivitySet normalize_xyz_luminance(const SensitivitySet& cmf,
                                       const Spectrum& d65);

/// 15 Gaussian narrowband channels, centers 410-690 nm, 25 nm FWHM.
SensitivitySet gaussian_ms_sensitivities(const WavelengthGrid& grid);

/// Broadband synthetic RGB camera (three overlapping Gaussians).
SensitivitySet default_rgb_sensitivities(const WavelengthGrid& grid);

/// Deterministic illuminant bank: blackbodies spread evenly in mired over
/// 2500-7500 K, CIE D65, and two spiky synthetic fluorescents. `count` >= 3.
std::vector<Spectrum> default_illuminant_bank(const WavelengthGrid& grid,
                                              int count);

}  // namespace mscc
