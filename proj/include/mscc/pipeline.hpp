#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mscc/illuminant.hpp"
#include "mscc/mat3.hpp"
#include "mscc/spectral.hpp"

namespace mscc {

/// Dual color-space-transform preset anchored at two reference CCTs.
struct CstPreset {
  Mat3 m_lo;
  double cct_lo = 2500.0;
  Mat3 m_hi;
  double cct_hi = 6500.0;

  void validate() const;
};

/// Camera identity: 3-channel sensitivities plus the CST preset calibrated
/// against them.
struct CameraProfile {
  std::string name;
  SensitivitySet sensitivities;
  CstPreset cst;

  void validate() const;
};

/// Channel-wise illuminant discounting. A pixel equal to est.rgb maps to
/// (1,1,1): each channel is divided by est.rgb[c] * sqrt(3).
PlanarImage von_kries_correct(const PlanarImage& img,
                              const IlluminantEstimate& est);

struct CctEstimate {
  double kelvin = 0.0;
  bool clamped = false;  // set when the result hit a range bound or the
                         // McCamy singularity
};

/// McCamy's approximation from the estimate's chromaticity, bootstrapped
/// through the profile's high-CCT matrix. Clamped to [1000, 25000] K.
CctEstimate estimate_cct(const IlluminantEstimate& est,
                         const CameraProfile& profile);

struct CstFit {
  Mat3 matrix;
  double residual_rms = 0.0;
};

using PatchPair = std::pair<Vec3, Vec3>;  // (camera triple after von Kries, XYZ under D65)

/// Unconstrained least-squares 3x3 fit via normal equations with 1e-12
/// diagonal regularization.
CstFit calibrate_cst(const std::vector<PatchPair>& patch_pairs);

/// Least-squares fit constrained to map `anchor.first` exactly onto
/// `anchor.second`; used when building shipped profiles so that neutral
/// camera input lands exactly on the target white axis.
CstFit calibrate_cst_anchored(const std::vector<PatchPair>& patch_pairs,
                              const PatchPair& anchor);

/// Mired-linear blend of the two anchor matrices, clamped outside the span.
Mat3 interpolate_cst(const CstPreset& preset, double cct);

struct CorrectionRecord {
  PlanarImage xyz;
  IlluminantEstimate estimate;
  CctEstimate cct;
  Mat3 cst;
};

/// Full traditional path: estimate, von Kries, CCT, CST interpolation,
/// per-pixel matrix application. Output is tagged xyz.
CorrectionRecord traditional_correct(const PlanarImage& img,
                                     const CameraProfile& profile,
                                     const EstimatorSpec& spec);

/// Same stages with an externally supplied illuminant estimate (used by the
/// oracle evaluation mode).
CorrectionRecord traditional_correct_with_estimate(
    const PlanarImage& img, const CameraProfile& profile,
    const IlluminantEstimate& est);

/// Applies a 3x3 matrix to every pixel; mask is preserved.
PlanarImage apply_matrix(const PlanarImage& img, const Mat3& m, ColorSpace tag);

/// Builds a profile by rendering a reflectance chart through `sens` under
/// blackbody SPDs at the two anchor temperatures, white balancing with the
/// exact flat-field estimate, and fitting anchored CSTs against the chart's
/// XYZ coordinates under `d65` through `cmf`. The chart must contain at
/// least one spectrally flat (neutral) patch, which becomes the anchor.
CameraProfile build_camera_profile(const std::string& name,
                                   const SensitivitySet& sens,
                                   const SensitivitySet& chart,
                                   const SensitivitySet& cmf,
                                   const Spectrum& d65, double cct_lo = 2500.0,
                                   double cct_hi = 6500.0);

/// Profile serialization: JSON document with both matrices row-major.
std::string profile_to_json(const CameraProfile& profile,
                            const std::string& sensitivity_ref);
CameraProfile profile_from_json(const std::string& json_text,
                                const SensitivitySet& sens);

/// Synthetic 24-patch calibration chart (18 chromatic + 6 neutral smooth
/// reflectances) standing in for a physical color-rendition target.
SpectralTable standard_chart24(const WavelengthGrid& grid);

}  // namespace mscc
