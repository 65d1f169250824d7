#include "mscc/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace mscc {

void CstPreset::validate() const {
  if (!(cct_lo < cct_hi))
    throw ConfigError("cst preset: cct_lo must be below cct_hi");
  for (const Mat3* m : {&m_lo, &m_hi}) {
    for (double v : m->m)
      if (!std::isfinite(v)) throw DataError("cst preset: non-finite matrix");
    if (std::abs(m->det()) <= 1e-9)
      throw DataError("cst preset: near-singular matrix");
  }
}

void CameraProfile::validate() const {
  sensitivities.validate();
  if (sensitivities.channel_count() != 3)
    throw ConfigError("camera profile: exactly 3 channels required");
  cst.validate();
}

PlanarImage von_kries_correct(const PlanarImage& img,
                              const IlluminantEstimate& est) {
  if (img.space != ColorSpace::CameraRaw)
    throw DataError("von kries: image must be camera-raw");
  if (img.channels() != 3 || est.rgb.size() != 3)
    throw DataError("von kries: 3 channels required");
  const double sqrt3 = std::sqrt(3.0);
  for (double e : est.rgb)
    if (!(e > 0.0)) throw NumericError("von kries: estimate component not positive");
  PlanarImage out = img;
  const std::size_t plane = img.plane_size();
  for (int c = 0; c < 3; ++c) {
    double scale = 1.0 / (est.rgb[c] * sqrt3);
    double* p = &out.data[static_cast<std::size_t>(c) * plane];
    for (std::size_t i = 0; i < plane; ++i) p[i] *= scale;
  }
  return out;
}

CctEstimate estimate_cct(const IlluminantEstimate& est,
                         const CameraProfile& profile) {
  if (est.rgb.size() != 3) throw DataError("cct: estimate must have 3 channels");
  Vec3 xyz = profile.cst.m_hi.apply({est.rgb[0], est.rgb[1], est.rgb[2]});
  double sum = xyz[0] + xyz[1] + xyz[2];
  CctEstimate out;
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    out.kelvin = 6500.0;
    out.clamped = true;
    return out;
  }
  double x = xyz[0] / sum;
  double y = xyz[1] / sum;
  double denom = 0.1858 - y;
  if (std::abs(denom) < 1e-12) {
    // McCamy singularity; the polynomial diverges toward +inf for x > 0.3320.
    out.kelvin = x >= 0.3320 ? 25000.0 : 1000.0;
    out.clamped = true;
    return out;
  }
  double n = (x - 0.3320) / denom;
  double cct = 449.0 * n * n * n + 3525.0 * n * n + 6823.3 * n + 5520.33;
  out.kelvin = std::clamp(cct, 1000.0, 25000.0);
  out.clamped = out.kelvin != cct;
  return out;
}

namespace {

CstFit calibrate_rows(const std::vector<PatchPair>& pairs,
                      const PatchPair* anchor) {
  const std::size_t n = pairs.size();
  if (n < 3) throw DataError("cst calibration: need at least 3 patches");
  // Normal-equation blocks shared by the three output rows.
  double vtv[9] = {0};
  double vtx[3][3] = {{0}};
  for (const auto& [v, x] : pairs) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) vtv[i * 3 + j] += v[i] * v[j];
      for (int q = 0; q < 3; ++q) vtx[q][i] += v[i] * x[q];
    }
  }
  double trace = vtv[0] + vtv[4] + vtv[8];
  Mat3 gram;
  std::copy(vtv, vtv + 9, gram.m.begin());
  double scale = trace / 3.0;
  if (!(scale > 0.0) || std::abs(gram.det()) < 1e-12 * scale * scale * scale)
    throw DataError("cst calibration: rank-deficient patch set");
  for (int i = 0; i < 3; ++i) vtv[i * 3 + i] += 1e-12;

  CstFit fit;
  for (int q = 0; q < 3; ++q) {
    double row[3];
    if (anchor == nullptr) {
      double a[9];
      std::copy(vtv, vtv + 9, a);
      double rhs[3] = {vtx[q][0], vtx[q][1], vtx[q][2]};
      solve_dense(3, a, rhs);
      std::copy(rhs, rhs + 3, row);
    } else {
      // KKT system: least squares subject to row . anchor_v = anchor_x[q].
      const Vec3& av = anchor->first;
      double a[16] = {vtv[0], vtv[1], vtv[2], av[0],  //
                      vtv[3], vtv[4], vtv[5], av[1],  //
                      vtv[6], vtv[7], vtv[8], av[2],  //
                      av[0],  av[1],  av[2],  0.0};
      double rhs[4] = {vtx[q][0], vtx[q][1], vtx[q][2], anchor->second[q]};
      solve_dense(4, a, rhs);
      std::copy(rhs, rhs + 3, row);
    }
    for (int j = 0; j < 3; ++j) fit.matrix(q, j) = row[j];
  }

  KahanSum rss;
  for (const auto& [v, x] : pairs) {
    Vec3 pred = fit.matrix.apply(v);
    for (int q = 0; q < 3; ++q) {
      double r = pred[q] - x[q];
      rss.add(r * r);
    }
  }
  fit.residual_rms = std::sqrt(rss.value() / static_cast<double>(n));
  return fit;
}

}  // namespace

CstFit calibrate_cst(const std::vector<PatchPair>& patch_pairs) {
  return calibrate_rows(patch_pairs, nullptr);
}

CstFit calibrate_cst_anchored(const std::vector<PatchPair>& patch_pairs,
                              const PatchPair& anchor) {
  return calibrate_rows(patch_pairs, &anchor);
}

Mat3 interpolate_cst(const CstPreset& preset, double cct) {
  if (!(cct > 0.0)) throw ConfigError("cst interpolation: cct must be positive");
  double w = (1.0 / cct - 1.0 / preset.cct_hi) /
             (1.0 / preset.cct_lo - 1.0 / preset.cct_hi);
  w = std::clamp(w, 0.0, 1.0);
  return w * preset.m_lo + (1.0 - w) * preset.m_hi;
}

PlanarImage apply_matrix(const PlanarImage& img, const Mat3& m, ColorSpace tag) {
  if (img.channels() != 3) throw DataError("apply matrix: 3 channels required");
  PlanarImage out(img.height, img.width, 3, tag);
  out.mask = img.mask;
  const std::size_t plane = img.plane_size();
  const double* r = &img.data[0];
  const double* g = &img.data[plane];
  const double* b = &img.data[2 * plane];
  for (int c = 0; c < 3; ++c) {
    double* dst = &out.data[static_cast<std::size_t>(c) * plane];
    for (std::size_t i = 0; i < plane; ++i)
      dst[i] = m(c, 0) * r[i] + m(c, 1) * g[i] + m(c, 2) * b[i];
  }
  return out;
}

CorrectionRecord traditional_correct_with_estimate(
    const PlanarImage& img, const CameraProfile& profile,
    const IlluminantEstimate& est) {
  CorrectionRecord rec;
  rec.estimate = est;
  PlanarImage wb = von_kries_correct(img, est);
  rec.cct = estimate_cct(est, profile);
  rec.cst = interpolate_cst(profile.cst, rec.cct.kelvin);
  rec.xyz = apply_matrix(wb, rec.cst, ColorSpace::Xyz);
  return rec;
}

CorrectionRecord traditional_correct(const PlanarImage& img,
                                     const CameraProfile& profile,
                                     const EstimatorSpec& spec) {
  return traditional_correct_with_estimate(img, profile,
                                           minkowski_estimate(img, spec));
}

CameraProfile build_camera_profile(const std::string& name,
                                   const SensitivitySet& sens,
                                   const SensitivitySet& chart,
                                   const SensitivitySet& cmf,
                                   const Spectrum& d65, double cct_lo,
                                   double cct_hi) {
  sens.validate();
  if (sens.channel_count() != 3)
    throw ConfigError("profile builder: camera must have 3 channels");
  const WavelengthGrid& grid = sens.grid;
  SensitivitySet chart_g = resample_sensitivities(chart, grid);
  SensitivitySet cmf_g = resample_sensitivities(cmf, grid);
  Spectrum d65_g = resample_spectrum(d65, grid);
  const int npatch = chart_g.channel_count();
  const double sqrt3 = std::sqrt(3.0);

  // XYZ side (shared by both anchors): patch under D65 through the CMFs.
  std::vector<Vec3> xyz(npatch);
  for (int j = 0; j < npatch; ++j)
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int b = 0; b < grid.count; ++b)
        s += chart_g.channels[j][b] * d65_g.values[b] * cmf_g.channels[c][b] *
             grid.step;
      xyz[j][c] = s;
    }

  // The anchor is the brightest spectrally flat patch.
  int anchor_idx = -1;
  double anchor_level = -1.0;
  for (int j = 0; j < npatch; ++j) {
    auto [mn, mx] = std::minmax_element(chart_g.channels[j].begin(),
                                        chart_g.channels[j].end());
    if (*mx - *mn < 1e-9 && *mx > anchor_level) {
      anchor_level = *mx;
      anchor_idx = j;
    }
  }
  if (anchor_idx < 0)
    throw ConfigError("profile builder: chart needs a spectrally flat patch");

  auto fit_for = [&](double kelvin) {
    Spectrum spd = blackbody_spd(grid, kelvin);
    std::vector<double> ff = flat_field_color(spd, sens);
    IlluminantEstimate est = normalize_estimate(ff);
    std::vector<PatchPair> pairs(npatch);
    for (int j = 0; j < npatch; ++j) {
      Vec3 cam{};
      for (int c = 0; c < 3; ++c) {
        double s = 0.0;
        for (int b = 0; b < grid.count; ++b)
          s += chart_g.channels[j][b] * spd.values[b] * sens.channels[c][b] *
               grid.step;
        cam[c] = s / (est.rgb[c] * sqrt3);
      }
      pairs[j] = {cam, xyz[j]};
    }
    return calibrate_cst_anchored(pairs, pairs[anchor_idx]);
  };

  CameraProfile profile;
  profile.name = name;
  profile.sensitivities = sens;
  profile.cst.cct_lo = cct_lo;
  profile.cst.cct_hi = cct_hi;
  profile.cst.m_lo = fit_for(cct_lo).matrix;
  profile.cst.m_hi = fit_for(cct_hi).matrix;
  profile.validate();
  return profile;
}

std::string profile_to_json(const CameraProfile& profile,
                            const std::string& sensitivity_ref) {
  nlohmann::ordered_json j;
  j["name"] = profile.name;
  j["sensitivity"] = sensitivity_ref;
  j["cct_lo"] = profile.cst.cct_lo;
  j["cct_hi"] = profile.cst.cct_hi;
  j["m_lo"] = profile.cst.m_lo.m;
  j["m_hi"] = profile.cst.m_hi.m;
  return j.dump(2) + "\n";
}

CameraProfile profile_from_json(const std::string& json_text,
                                const SensitivitySet& sens) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("profile: bad JSON: ") + e.what());
  }
  CameraProfile profile;
  try {
    profile.name = j.at("name").get<std::string>();
    profile.cst.cct_lo = j.at("cct_lo").get<double>();
    profile.cst.cct_hi = j.at("cct_hi").get<double>();
    auto lo = j.at("m_lo").get<std::vector<double>>();
    auto hi = j.at("m_hi").get<std::vector<double>>();
    if (lo.size() != 9 || hi.size() != 9)
      throw DataError("profile: matrices must have 9 entries");
    std::copy(lo.begin(), lo.end(), profile.cst.m_lo.m.begin());
    std::copy(hi.begin(), hi.end(), profile.cst.m_hi.m.begin());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("profile: missing field: ") + e.what());
  }
  profile.sensitivities = sens;
  profile.validate();
  return profile;
}

/// Synthetic 24-patch calibration chart: six neutral patches plus eighteen
/// smooth chromatic reflectances spanning the classic chart hues.
SpectralTable standard_chart24(const WavelengthGrid& grid) {
  struct Lobe {
    char kind;  // 'g' gaussian bump, 's' sigmoid step up in wavelength
    double amp, center, width;
  };
  struct Patch {
    const char* name;
    double base;
    Lobe lobes[2];
    int n_lobes;
  };
  static const Patch patches[] = {
      {"dark_skin", 0.06, {{'s', 0.30, 580, 40}}, 1},
      {"light_skin", 0.18, {{'s', 0.45, 560, 50}}, 1},
      {"blue_sky", 0.10, {{'g', 0.30, 460, 50}}, 1},
      {"foliage", 0.06, {{'g', 0.22, 550, 35}}, 1},
      {"blue_flower", 0.12, {{'g', 0.35, 450, 40}, {'s', 0.15, 640, 25}}, 2},
      {"bluish_green", 0.10, {{'g', 0.40, 500, 45}}, 1},
      {"orange", 0.05, {{'s', 0.55, 590, 25}}, 1},
      {"purplish_blue", 0.08, {{'g', 0.40, 445, 35}}, 1},
      {"moderate_red", 0.06, {{'s', 0.45, 605, 20}}, 1},
      {"purple", 0.05, {{'g', 0.20, 430, 30}, {'s', 0.25, 650, 25}}, 2},
      {"yellow_green", 0.06, {{'g', 0.45, 555, 50}}, 1},
      {"orange_yellow", 0.06, {{'s', 0.55, 575, 22}}, 1},
      {"blue", 0.05, {{'g', 0.35, 450, 28}}, 1},
      {"green", 0.05, {{'g', 0.35, 535, 32}}, 1},
      {"red", 0.04, {{'s', 0.55, 615, 18}}, 1},
      {"yellow", 0.06, {{'s', 0.60, 555, 25}}, 1},
      {"magenta", 0.08, {{'g', 0.30, 440, 35}, {'s', 0.45, 600, 25}}, 2},
      {"cyan", 0.08, {{'g', 0.35, 490, 40}}, 1},
      {"white", 0.90, {}, 0},
      {"neutral_8", 0.59, {}, 0},
      {"neutral_65", 0.36, {}, 0},
      {"neutral_5", 0.20, {}, 0},
      {"neutral_35", 0.09, {}, 0},
      {"black", 0.031, {}, 0},
  };

  SpectralTable chart;
  chart.grid = grid;
  for (const Patch& p : patches) {
    std::vector<double> refl(grid.count);
    for (int i = 0; i < grid.count; ++i) {
      double lambda = grid.wavelength(i);
      double r = p.base;
      for (int k = 0; k < p.n_lobes; ++k) {
        const Lobe& lb = p.lobes[k];
        if (lb.kind == 'g') {
          double d = (lambda - lb.center) / lb.width;
          r += lb.amp * std::exp(-0.5 * d * d);
        } else {
          r += lb.amp / (1.0 + std::exp(-(lambda - lb.center) / lb.width));
        }
      }
      refl[i] = std::clamp(r, 0.02, 0.95);
    }
    chart.channels.push_back(std::move(refl));
    chart.channel_names.push_back(p.name);
  }
  return chart;
}

}  // namespace mscc
