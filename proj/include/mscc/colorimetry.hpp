#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mscc/common.hpp"
#include "mscc/mat3.hpp"
#include "mscc/spectral.hpp"

namespace mscc {

struct LabTriple {
  double L = 0.0;
  double a = 0.0;
  double b = 0.0;
};

/// Reference white tristimulus, Yn normalized to 1.
struct WhitePoint {
  double Xn = 0.9504559270516716;
  double Yn = 1.0;
  double Zn = 1.0890577507598784;

  void validate() const {
    if (!(Xn > 0.0 && Yn > 0.0 && Zn > 0.0))
      throw ConfigError("white point: components must be strictly positive");
  }
};

/// CIE D65 2-degree observer white (x=0.3127, y=0.3290 normalized to Yn=1).
WhitePoint d65_white_point();

/// CIE 1976 L*a*b* with the standard two-branch companding function.
LabTriple xyz_to_lab(const Vec3& xyz, const WhitePoint& white);

/// Analytic inverse of xyz_to_lab; used by round-trip checks.
Vec3 lab_to_xyz(const LabTriple& lab, const WhitePoint& white);

/// Euclidean CIELAB distance.
double delta_e76(const LabTriple& p, const LabTriple& q);

/// Full CIEDE2000 color difference with parametric weights.
double delta_e00(const LabTriple& p, const LabTriple& q, double kL = 1.0,
                 double kC = 1.0, double kH = 1.0);

/// Angle between two channel vectors, in degrees.
double angular_error(std::span<const double> u, std::span<const double> v);

/// Angle between the component-wise ratio pred/gt and the achromatic axis,
/// in degrees. Requires every gt component strictly positive.
double reproduction_error(std::span<const double> pred,
                          std::span<const double> gt);

enum class MetricKind { De00, De76, Reproduction, Angular };

struct MetricMean {
  double mean = 0.0;
  std::size_t count = 0;
};

/// Per-pixel metric averaged over the intersection of both validity masks.
/// De00/De76 require xyz inputs (converted through `white`); Reproduction
/// additionally drops pixels whose reference has a non-positive component.
MetricMean image_metric_mean(const PlanarImage& predicted,
                             const PlanarImage& reference, MetricKind metric,
                             const WhitePoint& white,
                             SummationMode mode = SummationMode::Kahan);

/// XYZ to display sRGB: 3x3 matrix, clip to [0,1], standard transfer curve.
PlanarImage xyz_to_srgb_encode(const PlanarImage& img);

}  // namespace mscc
