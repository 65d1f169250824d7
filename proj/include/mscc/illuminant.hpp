#pragma once

#include <limits>
#include <string>
#include <vector>

#include "mscc/spectral.hpp"

namespace mscc {

/// One member of the Minkowski-norm estimator family. p = infinity selects
/// the per-channel maximum.
struct EstimatorSpec {
  int derivative_order = 0;  // 0, 1 or 2
  double minkowski_p = 1.0;  // >= 1, may be infinity
  double smoothing_sigma = 0.0;
  std::string name = "gw";

  void validate() const;
  bool p_is_infinite() const {
    return minkowski_p == std::numeric_limits<double>::infinity();
  }
};

/// Named presets: gw, wp, sog, ggw, ge1, ge2.
EstimatorSpec estimator_preset(const std::string& name);

/// Unit-norm illuminant color plus the pre-normalization magnitude.
struct IlluminantEstimate {
  std::vector<double> rgb;
  double raw_magnitude = 0.0;
};

IlluminantEstimate normalize_estimate(const std::vector<double>& raw);

/// Gaussian smoothing / derivative-energy filtering with replicate borders.
/// order 0: blur (identity when sigma = 0); order 1: gradient magnitude;
/// order 2: second-derivative magnitude sqrt(Gxx^2 + 2 Gxy^2 + Gyy^2).
PlanarImage gaussian_derivative(const PlanarImage& img, double sigma, int order);

/// Minkowski mean of the filtered absolute response per channel, then
/// L2-normalized. `full_scale` > 0 additionally excludes pixels at or above
/// 0.98 of that level in any channel (clipping guard for integer-sourced
/// data; synthetic float renders keep the default 0 = disabled).
IlluminantEstimate minkowski_estimate(const PlanarImage& img,
                                      const EstimatorSpec& spec,
                                      double full_scale = 0.0);

}  // namespace mscc
