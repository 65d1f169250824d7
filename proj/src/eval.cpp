#include "mscc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mscc/parallel.hpp"
#include "json.hpp"

namespace mscc {

namespace {

double rank_quantile(const std::vector<double>& sorted, double q) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  double r = 1.0 + (static_cast<double>(n) - 1.0) * q;  // 1-based rank
  double lo = std::floor(r);
  double hi = std::ceil(r);
  std::size_t li = static_cast<std::size_t>(lo) - 1;
  std::size_t hi_i = static_cast<std::size_t>(hi) - 1;
  if (li == hi_i) return sorted[li];
  return sorted[li] + (r - lo) * (sorted[hi_i] - sorted[li]);
}

}  // namespace

ErrorStats aggregate_stats(const std::vector<double>& values) {
  if (values.empty()) throw DataError("aggregate stats: empty input");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  ErrorStats s;
  s.n = n;
  KahanSum sum;
  for (double v : sorted) sum.add(v);
  s.mean = sum.value() / static_cast<double>(n);
  s.median = rank_quantile(sorted, 0.50);
  double q1 = rank_quantile(sorted, 0.25);
  double q3 = rank_quantile(sorted, 0.75);
  s.trimean = (q1 + 2.0 * s.median + q3) / 4.0;
  s.p95 = rank_quantile(sorted, 0.95);
  s.p99 = rank_quantile(sorted, 0.99);
  s.max = sorted.back();

  const std::size_t quarter = (n + 3) / 4;  // ceil(n/4)
  KahanSum best, worst;
  for (std::size_t i = 0; i < quarter; ++i) {
    best.add(sorted[i]);
    worst.add(sorted[n - 1 - i]);
  }
  s.best25_mean = best.value() / static_cast<double>(quarter);
  s.worst25_mean = worst.value() / static_cast<double>(quarter);
  return s;
}

std::string MethodSpec::label() const {
  switch (kind) {
    case Kind::Traditional: return "traditional-" + estimator.name;
    case Kind::Kan: return "kan";
    case Kind::Oracle: return "oracle-traditional";
  }
  return "unknown";
}

namespace {

std::string fingerprint_json(const nlohmann::ordered_json& j) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

}  // namespace

EvaluationReport evaluate_method(const DatasetManifest& manifest,
                                 const MethodSpec& method,
                                 const CameraProfile& profile,
                                 double alpha, int threads) {
  auto test_refs = manifest.partition("test");
  if (test_refs.empty()) throw DataError("evaluate: empty test partition");

  std::optional<kan::KanParams> model;
  if (method.kind == MethodSpec::Kind::Kan) {
    if (method.checkpoint_path.empty())
      throw ConfigError("evaluate: kan method needs a checkpoint");
    model = kan::load_checkpoint(method.checkpoint_path).params;
  }

  const WhitePoint white = d65_white_point();
  std::vector<PerImageMetrics> per_image(test_refs.size());

  parallel_for_indexed(test_refs.size(), threads, [&](std::size_t i) {
    const TripletRef& ref = *test_refs[i];
    PlanarImage rgb = load_image(manifest.resolve(ref.rgb_path));
    PlanarImage gt = load_image(manifest.resolve(ref.gt_path));
    if (alpha != 1.0) {
      rgb = scale_exposure(rgb, alpha);
      gt = scale_exposure(gt, alpha);
    }

    PlanarImage corrected;
    switch (method.kind) {
      case MethodSpec::Kind::Traditional: {
        corrected = traditional_correct(rgb, profile, method.estimator).xyz;
        break;
      }
      case MethodSpec::Kind::Oracle: {
        TripletMeta meta = load_triplet_meta(manifest.resolve(ref.meta_path));
        IlluminantEstimate est = normalize_estimate(meta.gt_illuminant_rgb);
        corrected = traditional_correct_with_estimate(rgb, profile, est).xyz;
        break;
      }
      case MethodSpec::Kind::Kan: {
        PlanarImage ms = load_image(manifest.resolve(ref.ms_path));
        if (alpha != 1.0) ms = scale_exposure(ms, alpha);
        corrected = kan::predict_image(*model, rgb, ms);
        break;
      }
    }

    PerImageMetrics m;
    m.scene_id = ref.scene_id;
    m.illuminant = ref.illuminant;
    m.de00 = image_metric_mean(corrected, gt, MetricKind::De00, white).mean;
    m.reproduction =
        image_metric_mean(corrected, gt, MetricKind::Reproduction, white).mean;
    per_image[i] = std::move(m);
  });

  EvaluationReport report;
  report.method = method.label();
  report.camera = manifest.camera_name;
  report.per_image = std::move(per_image);
  std::vector<double> de00, repro;
  for (const auto& m : report.per_image) {
    de00.push_back(m.de00);
    repro.push_back(m.reproduction);
  }
  report.de00 = aggregate_stats(de00);
  report.reproduction = aggregate_stats(repro);

  nlohmann::ordered_json cfg;
  cfg["method"] = report.method;
  cfg["camera"] = report.camera;
  cfg["alpha"] = alpha;
  cfg["estimator"] = {{"order", method.estimator.derivative_order},
                      {"p", method.estimator.p_is_infinite()
                                ? -1.0
                                : method.estimator.minkowski_p},
                      {"sigma", method.estimator.smoothing_sigma}};
  cfg["checkpoint"] = method.checkpoint_path;
  cfg["dataset_seed"] = manifest.seed;
  cfg["n_test"] = test_refs.size();
  cfg["quantile_rule"] = "linear-closest-ranks";
  cfg["quartile_rule"] = "ceil(n/4)";
  cfg["per_image_metric"] = "mean-over-valid-pixels";
  report.config_fingerprint = fingerprint_json(cfg);
  return report;
}

std::vector<ExposureCell> run_exposure_ablation(
    const DatasetManifest& manifest, const std::vector<MethodSpec>& methods,
    const CameraProfile& profile, const std::vector<double>& alphas,
    int threads) {
  for (double a : alphas)
    if (!(a > 0.0)) throw ConfigError("exposure ablation: alphas must be positive");
  std::vector<ExposureCell> table;
  for (const MethodSpec& m : methods)
    for (double a : alphas) {
      EvaluationReport r = evaluate_method(manifest, m, profile, a, threads);
      table.push_back({m.label(), a, r.reproduction.mean, r.de00.mean});
    }
  return table;
}

MisalignmentReport run_misalignment_experiment(
    const DatasetManifest& manifest_aligned,
    const DatasetManifest& manifest_misaligned, const std::string& ckpt_path,
    const CameraProfile& profile, const kan::TrainConfig& ft_config,
    int threads) {
  // Both manifests must cover the same scenes with the same partitions.
  if (manifest_aligned.splits.test != manifest_misaligned.splits.test ||
      manifest_aligned.splits.train != manifest_misaligned.splits.train)
    throw DataError("misalignment experiment: manifests do not share scene splits");

  kan::Checkpoint base = kan::load_checkpoint(ckpt_path);

  MethodSpec kan_method;
  kan_method.kind = MethodSpec::Kind::Kan;
  kan_method.checkpoint_path = ckpt_path;

  MisalignmentReport out;
  out.unadapted =
      evaluate_method(manifest_misaligned, kan_method, profile, 1.0, threads);

  kan::TrainConfig cfg = ft_config;
  cfg.freeze = {kan::ParamGroup::SplineCoeffs, kan::ParamGroup::Bypass,
                kan::ParamGroup::Bias};
  kan::TrainResult ft = kan::train(manifest_misaligned, cfg, &base.params);
  out.fine_tune_log = ft.log;

  // Everything outside the spectral encoder must be bit-identical.
  out.frozen_params_identical = true;
  auto [enc_off, enc_len] = base.params.group_span(kan::ParamGroup::MsEncoder);
  for (std::size_t i = 0; i < base.params.theta.size(); ++i) {
    if (i >= enc_off && i < enc_off + enc_len) continue;
    if (ft.params.theta[i] != base.params.theta[i]) {
      out.frozen_params_identical = false;
      break;
    }
  }

  std::string ft_path = ckpt_path + ".finetuned";
  kan::save_checkpoint(ft_path, ft.params, fnv1a64("finetune"));
  MethodSpec ft_method = kan_method;
  ft_method.checkpoint_path = ft_path;
  out.fine_tuned =
      evaluate_method(manifest_misaligned, ft_method, profile, 1.0, threads);
  out.de00_delta = out.unadapted.de00.mean - out.fine_tuned.de00.mean;
  return out;
}

namespace {

nlohmann::ordered_json stats_to_json(const ErrorStats& s) {
  return {{"mean", s.mean},     {"median", s.median},
          {"trimean", s.trimean}, {"b25", s.best25_mean},
          {"w25", s.worst25_mean}, {"p95", s.p95},
          {"p99", s.p99},        {"max", s.max},
          {"n", s.n}};
}

}  // namespace

std::string report_to_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["method"] = report.method;
  j["camera"] = report.camera;
  j["config_fingerprint"] = report.config_fingerprint;
  j["conventions"] = {{"quantile_rule", "linear-closest-ranks"},
                      {"quartile_rule", "ceil(n/4)"},
                      {"per_image_metric", "mean-over-valid-pixels"},
                      {"statistics_over", "per-image means"}};
  j["de00"] = stats_to_json(report.de00);
  j["reproduction"] = stats_to_json(report.reproduction);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& m : report.per_image)
    rows.push_back({{"scene_id", m.scene_id},
                    {"illuminant", m.illuminant},
                    {"de00", m.de00},
                    {"reproduction", m.reproduction}});
  j["per_image"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string report_to_table(const EvaluationReport& report) {
  char line[256];
  std::string out;
  out += "Method: " + report.method + "  Camera: " + report.camera +
         "  (n=" + std::to_string(report.de00.n) + ")\n";
  std::snprintf(line, sizeof(line), "%-18s %7s %7s %7s %7s %7s %7s %7s %7s\n",
                "Metric", "Mean", "Med.", "Tri.", "B-25", "W-25", "95-P",
                "99-P", "Max");
  out += line;
  auto row = [&](const char* name, const ErrorStats& s) {
    std::snprintf(line, sizeof(line),
                  "%-18s %7.3f %7.3f %7.3f %7.3f %7.3f %7.3f %7.3f %7.3f\n",
                  name, s.mean, s.median, s.trimean, s.best25_mean,
                  s.worst25_mean, s.p95, s.p99, s.max);
    out += line;
  };
  row("DeltaE00", report.de00);
  row("Reproduction", report.reproduction);
  return out;
}

}  // namespace mscc
