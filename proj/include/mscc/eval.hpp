#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mscc/dataset_io.hpp"
#include "mscc/kan.hpp"
#include "mscc/pipeline.hpp"

namespace mscc {

/// Distribution summary used throughout the result tables. Quantiles use
/// linear interpolation between closest ranks (r = 1 + (n-1) q); trimean is
/// (Q1 + 2 Q2 + Q3) / 4; the quartile means take ceil(n/4) elements.
struct ErrorStats {
  double mean = 0.0;
  double median = 0.0;
  double trimean = 0.0;
  double best25_mean = 0.0;
  double worst25_mean = 0.0;
  double p95 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

ErrorStats aggregate_stats(const std::vector<double>& values);

struct PerImageMetrics {
  std::string scene_id;
  std::string illuminant;
  double de00 = 0.0;
  double reproduction = 0.0;
};

struct EvaluationReport {
  std::string method;
  std::string camera;
  std::vector<PerImageMetrics> per_image;
  ErrorStats de00;
  ErrorStats reproduction;
  std::string config_fingerprint;
};

/// How an image is corrected during evaluation.
struct MethodSpec {
  enum class Kind { Traditional, Kan, Oracle } kind = Kind::Traditional;
  EstimatorSpec estimator;          // Traditional
  std::string checkpoint_path;      // Kan
  std::string label() const;
};

/// Runs a method over the manifest's test partition and aggregates per-image
/// means. `oracle` feeds the recorded flat-field illuminant into the
/// traditional path. `alpha` scales rgb, ms, and gt before evaluation.
EvaluationReport evaluate_method(const DatasetManifest& manifest,
                                 const MethodSpec& method,
                                 const CameraProfile& profile,
                                 double alpha = 1.0, int threads = 1);

struct ExposureCell {
  std::string method;
  double alpha = 0.0;
  double mean_reproduction = 0.0;
  double mean_de00 = 0.0;
};

/// Ablation: re-evaluates every method at each exposure scale.
std::vector<ExposureCell> run_exposure_ablation(
    const DatasetManifest& manifest, const std::vector<MethodSpec>& methods,
    const CameraProfile& profile, const std::vector<double>& alphas,
    int threads = 1);

struct MisalignmentReport {
  EvaluationReport unadapted;   // aligned-trained checkpoint on misaligned test
  EvaluationReport fine_tuned;  // spectral-encoder-only fine-tune
  double de00_delta = 0.0;      // unadapted mean - fine-tuned mean
  std::vector<kan::EpochLog> fine_tune_log;
  bool frozen_params_identical = false;
};

/// Fine-tunes only the spectral encoder on the misaligned training split and
/// compares against the unadapted checkpoint on the misaligned test split.
MisalignmentReport run_misalignment_experiment(
    const DatasetManifest& manifest_aligned,
    const DatasetManifest& manifest_misaligned, const std::string& ckpt_path,
    const CameraProfile& profile, const kan::TrainConfig& ft_config,
    int threads = 1);

/// Report serialization: deterministic JSON plus the aligned text table.
std::string report_to_json(const EvaluationReport& report);
std::string report_to_table(const EvaluationReport& report);

}  // namespace mscc
