#include "mscc/colorimetry.hpp"

#include <algorithm>
#include <cmath>

namespace mscc {

namespace {

constexpr double kDeg = 180.0 / 3.14159265358979323846;
constexpr double kRad = 3.14159265358979323846 / 180.0;

// Two-branch CIE companding function and its threshold (6/29)^3.
constexpr double kLabDelta = 6.0 / 29.0;
constexpr double kLabDelta3 = kLabDelta * kLabDelta * kLabDelta;

double lab_f(double t) {
  if (t > kLabDelta3) return std::cbrt(t);
  return t / (3.0 * kLabDelta * kLabDelta) + 4.0 / 29.0;
}

double lab_f_inv(double u) {
  if (u > kLabDelta) return u * u * u;
  return 3.0 * kLabDelta * kLabDelta * (u - 4.0 / 29.0);
}

}  // namespace

WhitePoint d65_white_point() {
  // x = 0.3127, y = 0.3290 scaled to Yn = 1.
  WhitePoint w;
  w.Xn = 0.3127 / 0.3290;
  w.Yn = 1.0;
  w.Zn = (1.0 - 0.3127 - 0.3290) / 0.3290;
  return w;
}

LabTriple xyz_to_lab(const Vec3& xyz, const WhitePoint& white) {
  white.validate();
  for (double v : xyz)
    if (!std::isfinite(v)) throw NumericError("xyz_to_lab: non-finite input");
  double fx = lab_f(xyz[0] / white.Xn);
  double fy = lab_f(xyz[1] / white.Yn);
  double fz = lab_f(xyz[2] / white.Zn);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Vec3 lab_to_xyz(const LabTriple& lab, const WhitePoint& white) {
  double fy = (lab.L + 16.0) / 116.0;
  double fx = fy + lab.a / 500.0;
  double fz = fy - lab.b / 200.0;
  return {white.Xn * lab_f_inv(fx), white.Yn * lab_f_inv(fy),
          white.Zn * lab_f_inv(fz)};
}

double delta_e76(const LabTriple& p, const LabTriple& q) {
  double dL = p.L - q.L;
  double da = p.a - q.a;
  double db = p.b - q.b;
  return std::sqrt(dL * dL + da * da + db * db);
}

double delta_e00(const LabTriple& p, const LabTriple& q, double kL, double kC,
                 double kH) {
  // CIEDE2000 as published; hue handling follows the piecewise rules with the
  // "<= 180" branch resolving exact ties.
  const double C1 = std::hypot(p.a, p.b);
  const double C2 = std::hypot(q.a, q.b);
  const double Cbar = 0.5 * (C1 + C2);
  const double Cbar7 = std::pow(Cbar, 7.0);
  const double pow25_7 = 6103515625.0;  // 25^7
  const double G = 0.5 * (1.0 - std::sqrt(Cbar7 / (Cbar7 + pow25_7)));
  const double a1p = (1.0 + G) * p.a;
  const double a2p = (1.0 + G) * q.a;
  const double C1p = std::hypot(a1p, p.b);
  const double C2p = std::hypot(a2p, q.b);

  auto hue_deg = [](double a, double b) {
    if (a == 0.0 && b == 0.0) return 0.0;
    double h = std::atan2(b, a) * kDeg;
    return h < 0.0 ? h + 360.0 : h;
  };
  const double h1p = hue_deg(a1p, p.b);
  const double h2p = hue_deg(a2p, q.b);

  const double dLp = q.L - p.L;
  const double dCp = C2p - C1p;

  double dhp = 0.0;
  if (C1p * C2p != 0.0) {
    double diff = h2p - h1p;
    if (std::abs(diff) <= 180.0)
      dhp = diff;
    else if (diff > 180.0)
      dhp = diff - 360.0;
    else
      dhp = diff + 360.0;
  }
  const double dHp = 2.0 * std::sqrt(C1p * C2p) * std::sin(0.5 * dhp * kRad);

  const double Lbp = 0.5 * (p.L + q.L);
  const double Cbp = 0.5 * (C1p + C2p);

  double hbp;
  if (C1p * C2p == 0.0) {
    hbp = h1p + h2p;
  } else if (std::abs(h1p - h2p) <= 180.0) {
    hbp = 0.5 * (h1p + h2p);
  } else if (h1p + h2p < 360.0) {
    hbp = 0.5 * (h1p + h2p + 360.0);
  } else {
    hbp = 0.5 * (h1p + h2p - 360.0);
  }

  const double T = 1.0 - 0.17 * std::cos((hbp - 30.0) * kRad) +
                   0.24 * std::cos(2.0 * hbp * kRad) +
                   0.32 * std::cos((3.0 * hbp + 6.0) * kRad) -
                   0.20 * std::cos((4.0 * hbp - 63.0) * kRad);
  const double dTheta = 30.0 * std::exp(-((hbp - 275.0) / 25.0) * ((hbp - 275.0) / 25.0));
  const double Cbp7 = std::pow(Cbp, 7.0);
  const double Rc = 2.0 * std::sqrt(Cbp7 / (Cbp7 + pow25_7));
  const double Lm50sq = (Lbp - 50.0) * (Lbp - 50.0);
  const double Sl = 1.0 + 0.015 * Lm50sq / std::sqrt(20.0 + Lm50sq);
  const double Sc = 1.0 + 0.045 * Cbp;
  const double Sh = 1.0 + 0.015 * Cbp * T;
  const double Rt = -std::sin(2.0 * dTheta * kRad) * Rc;

  const double tl = dLp / (kL * Sl);
  const double tc = dCp / (kC * Sc);
  const double th = dHp / (kH * Sh);
  return std::sqrt(tl * tl + tc * tc + th * th + Rt * tc * th);
}

double angular_error(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size() || u.empty())
    throw ConfigError("angular error: vector size mismatch");
  double uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0)
    throw NumericError("angular error: zero-norm input");
  // arccos(u.v / |u||v|) evaluated through the half-angle form, which is
  // well conditioned near 0 and 180 degrees and exactly zero for u == v.
  const double nu = std::sqrt(uu);
  const double nv = std::sqrt(vv);
  double diff2 = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double a = u[i] / nu;
    double b = v[i] / nv;
    diff2 += (a - b) * (a - b);
    sum2 += (a + b) * (a + b);
  }
  return 2.0 * std::atan2(std::sqrt(diff2), std::sqrt(sum2)) * kDeg;
}

double reproduction_error(std::span<const double> pred,
                          std::span<const double> gt) {
  if (pred.size() != gt.size() || pred.empty())
    throw ConfigError("reproduction error: vector size mismatch");
  std::vector<double> ratio(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(gt[i] > 0.0))
      throw NumericError("reproduction error: reference component not positive");
    ratio[i] = pred[i] / gt[i];
  }
  std::vector<double> axis(pred.size(), 1.0);
  return angular_error(ratio, axis);
}

MetricMean image_metric_mean(const PlanarImage& predicted,
                             const PlanarImage& reference, MetricKind metric,
                             const WhitePoint& white, SummationMode mode) {
  if (predicted.height != reference.height ||
      predicted.width != reference.width ||
      predicted.channels() != reference.channels())
    throw DataError("metric mean: image dimensions differ");
  const bool needs_lab = metric == MetricKind::De00 || metric == MetricKind::De76;
  if (needs_lab && (predicted.space != ColorSpace::Xyz ||
                    reference.space != ColorSpace::Xyz))
    throw DataError("metric mean: delta-E metrics require xyz inputs");
  if (needs_lab && predicted.channels() != 3)
    throw DataError("metric mean: delta-E metrics require 3 channels");

  KahanSum ksum;
  double psum = 0.0;
  std::size_t n = 0;
  std::vector<double> pv(predicted.channels()), rv(reference.channels());
  for (int y = 0; y < predicted.height; ++y)
    for (int x = 0; x < predicted.width; ++x) {
      if (!predicted.valid(y, x) || !reference.valid(y, x)) continue;
      for (int c = 0; c < predicted.channels(); ++c) {
        pv[c] = predicted.at(c, y, x);
        rv[c] = reference.at(c, y, x);
      }
      double e = 0.0;
      switch (metric) {
        case MetricKind::De00:
        case MetricKind::De76: {
          LabTriple lp = xyz_to_lab({pv[0], pv[1], pv[2]}, white);
          LabTriple lr = xyz_to_lab({rv[0], rv[1], rv[2]}, white);
          e = metric == MetricKind::De00 ? delta_e00(lp, lr) : delta_e76(lp, lr);
          break;
        }
        case MetricKind::Reproduction: {
          bool ok = true;
          for (double g : rv)
            if (!(g > 0.0)) { ok = false; break; }
          if (!ok) continue;  // excluded, mirrors the mask rule
          e = reproduction_error(pv, rv);
          break;
        }
        case MetricKind::Angular: {
          e = angular_error(pv, rv);
          break;
        }
      }
      if (mode == SummationMode::Kahan)
        ksum.add(e);
      else
        psum += e;
      ++n;
    }
  if (n == 0) throw DataError("metric mean: empty valid mask");
  double total = mode == SummationMode::Kahan ? ksum.value() : psum;
  return {total / static_cast<double>(n), n};
}

PlanarImage xyz_to_srgb_encode(const PlanarImage& img) {
  if (img.space != ColorSpace::Xyz)
    throw DataError("srgb encode: input must be xyz");
  if (img.channels() != 3)
    throw DataError("srgb encode: input must have 3 channels");
  // IEC 61966-2-1 matrix, D65 white.
  static const double M[3][3] = {
      {3.2404542, -1.5371385, -0.4985314},
      {-0.9692660, 1.8760108, 0.0415560},
      {0.0556434, -0.2040259, 1.0572252},
  };
  PlanarImage out(img.height, img.width, 3, ColorSpace::SrgbEncoded);
  out.mask = img.mask;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double xyz[3] = {img.at(0, y, x), img.at(1, y, x), img.at(2, y, x)};
      for (int c = 0; c < 3; ++c) {
        double lin = M[c][0] * xyz[0] + M[c][1] * xyz[1] + M[c][2] * xyz[2];
        lin = std::clamp(lin, 0.0, 1.0);
        double enc = lin <= 0.0031308 ? 12.92 * lin
                                      : 1.055 * std::pow(lin, 1.0 / 2.4) - 0.055;
        out.at(c, y, x) = enc;
      }
    }
  return out;
}

}  // namespace mscc
