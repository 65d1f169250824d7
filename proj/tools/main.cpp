// Command-line surface for the spectral rendering, correction, and
// evaluation toolkit. Exit codes: 0 success, 2 config error, 3 data error,
// 4 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mscc/cie_data.hpp"
#include "mscc/dataset.hpp"
#include "mscc/dataset_io.hpp"
#include "mscc/eval.hpp"
#include "mscc/kan.hpp"
#include "mscc/pipeline.hpp"
#include "mscc/spectral_io.hpp"

namespace fs = std::filesystem;
using namespace mscc;

namespace {

struct GlobalOpts {
  std::uint64_t seed = 1;
  std::string config_path;
  std::string out;
  int threads = 1;
  bool deterministic = false;

  int effective_threads() const { return deterministic ? 1 : threads; }
};

nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    nlohmann::json j;
    in >> j;
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config JSON: ") + e.what());
  }
}

// Fills an option from the config file when it was not set on the command
// line. Keys use the long option name without dashes.
template <typename T>
void from_config(const CLI::Option* opt, const nlohmann::json& cfg,
                 const char* key, T& value) {
  if (opt != nullptr && opt->count() > 0) return;
  if (!cfg.contains(key)) return;
  try {
    value = cfg.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

SensitivitySet resolve_sensitivities(const std::string& spec,
                                     const WavelengthGrid& grid) {
  if (spec == "builtin:default-rgb") return default_rgb_sensitivities(grid);
  if (spec == "builtin:gaussian15") return gaussian_ms_sensitivities(grid);
  if (spec.rfind("builtin:", 0) == 0)
    throw ConfigError("unknown builtin sensitivity set: " + spec);
  return load_sensitivities_csv(spec, grid);
}

CameraProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open profile: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  // The sensitivity reference is relative to the profile's directory.
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError("profile is not valid JSON: " + path);
  std::string sens_ref = j.value("sensitivity", "");
  SensitivitySet sens;
  if (sens_ref.rfind("builtin:", 0) == 0) {
    sens = resolve_sensitivities(sens_ref, WavelengthGrid());
  } else if (!sens_ref.empty()) {
    fs::path sp(sens_ref);
    if (sp.is_relative()) sp = fs::path(path).parent_path() / sp;
    sens = load_sensitivities_csv_native(sp.string());
  } else {
    sens = default_rgb_sensitivities(WavelengthGrid());
  }
  return profile_from_json(text, sens);
}

EstimatorSpec estimator_from_flags(const std::string& name,
                                   std::optional<double> p,
                                   std::optional<double> sigma,
                                   std::optional<int> order) {
  EstimatorSpec spec = estimator_preset(name);
  if (p) spec.minkowski_p = *p < 0 ? std::numeric_limits<double>::infinity() : *p;
  if (sigma) spec.smoothing_sigma = *sigma;
  if (order) spec.derivative_order = *order;
  spec.validate();
  return spec;
}

MethodSpec parse_method(const std::string& label, const std::string& ckpt) {
  MethodSpec m;
  if (label == "oracle") {
    m.kind = MethodSpec::Kind::Oracle;
  } else if (label == "kan") {
    m.kind = MethodSpec::Kind::Kan;
    if (ckpt.empty()) throw ConfigError("method 'kan' requires --ckpt");
    m.checkpoint_path = ckpt;
  } else if (label == "traditional") {
    m.kind = MethodSpec::Kind::Traditional;
    m.estimator = estimator_preset("gw");
  } else {
    // traditional with a named estimator, e.g. "traditional-ge1" or "ge1".
    std::string est = label;
    if (est.rfind("traditional-", 0) == 0) est = est.substr(12);
    m.kind = MethodSpec::Kind::Traditional;
    m.estimator = estimator_preset(est);
  }
  return m;
}

kan::TrainConfig train_config_from(const nlohmann::json& cfg) {
  kan::TrainConfig tc;
  auto get = [&](const char* key, auto& field) {
    if (cfg.contains(key)) field = cfg.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("lr", tc.lr);
  get("max_epochs", tc.max_epochs);
  get("patience", tc.patience);
  get("batch", tc.batch);
  get("pixels_per_epoch", tc.pixels_per_epoch);
  get("val_pixels_per_image", tc.val_pixels_per_image);
  get("seed", tc.seed);
  get("spectral_features", tc.spectral_features);
  return tc;
}

std::uint64_t train_config_hash(const kan::TrainConfig& tc) {
  nlohmann::ordered_json j;
  j["lr"] = tc.lr;
  j["max_epochs"] = tc.max_epochs;
  j["patience"] = tc.patience;
  j["batch"] = tc.batch;
  j["pixels_per_epoch"] = tc.pixels_per_epoch;
  j["val_pixels_per_image"] = tc.val_pixels_per_image;
  j["seed"] = tc.seed;
  j["spectral_features"] = tc.spectral_features;
  return fnv1a64(j.dump());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

int run(int argc, char** argv) {
  CLI::App app{"Spectral image synthesis, color correction, and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--seed", g.seed, "Global seed");
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--out", g.out, "Output directory or file");
  app.add_option("--threads", g.threads, "Worker threads");
  app.add_flag("--deterministic", g.deterministic,
               "Force single-threaded deterministic execution");

  // make-synthetic-scenes ----------------------------------------------
  auto* mk = app.add_subcommand("make-synthetic-scenes",
                                "Generate synthetic reflectance cubes");
  SceneSetConfig sc;
  auto* mk_scenes = mk->add_option("--scenes", sc.count, "Scene count");
  auto* mk_h = mk->add_option("--height", sc.height, "Cube height");
  auto* mk_w = mk->add_option("--width", sc.width, "Cube width");
  auto* mk_blobs = mk->add_option("--blobs", sc.n_blobs, "Blobs per scene");
  bool no_white_patch = false;
  mk->add_flag("--no-white-patch", no_white_patch,
               "Skip the masked white reference patch");

  // render-dataset -------------------------------------------------------
  auto* rd = app.add_subcommand("render-dataset",
                                "Render RGB/MS/GT triplets from scene cubes");
  std::string rd_scenes, rd_camera = "builtin:default-rgb",
              rd_ms = "builtin:gaussian15", rd_camera_name = "default-rgb";
  RenderConfig rc;
  rd->add_option("--scenes", rd_scenes, "Scene directory")->required();
  rd->add_option("--camera", rd_camera, "Camera sensitivity CSV or builtin:...");
  rd->add_option("--ms-sens", rd_ms, "MS sensitivity CSV or builtin:...");
  rd->add_option("--camera-name", rd_camera_name, "Camera label");
  auto* rd_ill = rd->add_option("--illuminants", rc.illuminant_count,
                                "Illuminant bank size");
  auto* rd_factor = rd->add_option("--ms-factor", rc.ms_factor,
                                   "RGB to MS downsampling factor");

  // misalign-dataset ------------------------------------------------------
  auto* md = app.add_subcommand("misalign-dataset",
                                "Warp MS images with random homographies");
  std::string md_dataset;
  HomographyParams hp;
  md->add_option("--dataset", md_dataset, "Aligned dataset manifest")->required();
  md->add_option("--translation", hp.max_translation, "Max translation, MS px");
  md->add_option("--rotation", hp.max_rotation, "Max rotation, degrees");
  md->add_option("--scale-jitter", hp.scale_jitter, "Max scale jitter fraction");
  md->add_option("--perspective", hp.max_perspective, "Max perspective entry");

  // estimate-illuminant ----------------------------------------------------
  auto* ei = app.add_subcommand("estimate-illuminant",
                                "Statistical illuminant estimation");
  std::string ei_image, ei_name = "gw";
  std::optional<double> ei_p, ei_sigma, ei_full_scale;
  std::optional<int> ei_order;
  ei->add_option("--image", ei_image, "Camera-raw MCI1 image")->required();
  ei->add_option("--estimator", ei_name, "gw|wp|sog|ggw|ge1|ge2");
  ei->add_option("--p", ei_p, "Minkowski norm (negative for infinity)");
  ei->add_option("--sigma", ei_sigma, "Gaussian sigma, pixels");
  ei->add_option("--order", ei_order, "Derivative order 0|1|2");
  ei->add_option("--full-scale", ei_full_scale,
                 "Sensor full-scale level for saturation masking");

  // correct -----------------------------------------------------------------
  auto* co = app.add_subcommand("correct", "Correct a camera-raw image to XYZ");
  std::string co_mode = "traditional", co_image, co_ms, co_profile, co_ckpt,
              co_est = "gw";
  std::optional<double> co_p, co_sigma;
  std::optional<int> co_order;
  co->add_option("--mode", co_mode, "traditional|kan");
  co->add_option("--image", co_image, "Camera-raw MCI1 image")->required();
  co->add_option("--ms", co_ms, "MS MCI1 image (kan mode)");
  co->add_option("--profile", co_profile, "Camera profile JSON (traditional)");
  co->add_option("--ckpt", co_ckpt, "KAN checkpoint (kan mode)");
  co->add_option("--estimator", co_est, "Estimator preset name");
  co->add_option("--p", co_p, "Minkowski norm override");
  co->add_option("--sigma", co_sigma, "Sigma override");
  co->add_option("--order", co_order, "Derivative order override");

  // train-kan -----------------------------------------------------------------
  auto* tk = app.add_subcommand("train-kan", "Train the dual-input corrector");
  std::string tk_manifest, tk_init, tk_log;
  bool tk_freeze_spectral = false, tk_rgb_only = false;
  tk->add_option("--manifest", tk_manifest, "Dataset manifest")->required();
  tk->add_option("--init", tk_init, "Initial checkpoint");
  tk->add_option("--log", tk_log, "Write the training log JSON here");
  tk->add_flag("--freeze-all-but-spectral", tk_freeze_spectral,
               "Fine-tune only the spectral encoder");
  tk->add_flag("--rgb-only", tk_rgb_only, "Disable the spectral path (K=0)");

  // evaluate -----------------------------------------------------------------
  auto* ev = app.add_subcommand("evaluate", "Evaluate a method on the test split");
  std::string ev_manifest, ev_method = "traditional", ev_est = "gw", ev_ckpt,
              ev_profile;
  double ev_alpha = 1.0;
  ev->add_option("--manifest", ev_manifest, "Dataset manifest")->required();
  ev->add_option("--method", ev_method, "traditional|kan|oracle");
  ev->add_option("--estimator", ev_est, "Estimator preset (traditional)");
  ev->add_option("--ckpt", ev_ckpt, "KAN checkpoint");
  ev->add_option("--profile", ev_profile, "Camera profile JSON override");
  ev->add_option("--alpha", ev_alpha, "Exposure scale applied to all inputs");

  // ablate-exposure ------------------------------------------------------------
  auto* ax = app.add_subcommand("ablate-exposure",
                                "Reproduction error across exposure scales");
  std::string ax_manifest, ax_methods = "gw,oracle", ax_ckpt, ax_profile;
  std::string ax_alphas = "1,0.75,0.5";
  ax->add_option("--manifest", ax_manifest, "Dataset manifest")->required();
  ax->add_option("--methods", ax_methods,
                 "Comma list: gw|wp|sog|ggw|ge1|ge2|oracle|kan");
  ax->add_option("--ckpt", ax_ckpt, "KAN checkpoint (for method kan)");
  ax->add_option("--profile", ax_profile, "Camera profile JSON override");
  ax->add_option("--alphas", ax_alphas, "Comma list of exposure scales");

  // ablate-misalignment -----------------------------------------------------
  auto* am = app.add_subcommand("ablate-misalignment",
                                "Spectral-encoder fine-tuning on misaligned data");
  std::string am_aligned, am_misaligned, am_ckpt, am_profile;
  am->add_option("--manifest-aligned", am_aligned, "Aligned manifest")->required();
  am->add_option("--manifest-misaligned", am_misaligned, "Misaligned manifest")
      ->required();
  am->add_option("--ckpt", am_ckpt, "Aligned-trained checkpoint")->required();
  am->add_option("--profile", am_profile, "Camera profile JSON override");

  // export-srgb ---------------------------------------------------------------
  auto* ex = app.add_subcommand("export-srgb", "Encode an XYZ image to 16-bit PNG");
  std::string ex_image;
  ex->add_option("--image", ex_image, "XYZ MCI1 image")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints help or the parse diagnostic
    return code == 0 ? 0 : 2;
  }

  nlohmann::json cfg = load_config(g.config_path);
  const int threads = g.effective_threads();

  if (mk->parsed()) {
    if (g.out.empty()) throw ConfigError("make-synthetic-scenes requires --out");
    from_config(mk_scenes, cfg, "scenes", sc.count);
    from_config(mk_h, cfg, "height", sc.height);
    from_config(mk_w, cfg, "width", sc.width);
    from_config(mk_blobs, cfg, "blobs", sc.n_blobs);
    sc.seed = g.seed;
    sc.white_patch = !no_white_patch;
    auto ids = make_synthetic_scenes(g.out, sc);
    std::cout << "wrote " << ids.size() << " scenes to " << g.out << "\n";
    return 0;
  }

  if (rd->parsed()) {
    if (g.out.empty()) throw ConfigError("render-dataset requires --out");
    from_config(rd_ill, cfg, "illuminants", rc.illuminant_count);
    from_config(rd_factor, cfg, "ms_factor", rc.ms_factor);
    rc.split_seed = g.seed;
    rc.camera_name = rd_camera_name;
    rc.threads = threads;
    WavelengthGrid probe_grid;  // builtin sets accept any grid
    SensitivitySet cam = resolve_sensitivities(rd_camera, probe_grid);
    SensitivitySet ms = resolve_sensitivities(rd_ms, probe_grid);
    DatasetManifest m = render_dataset(rd_scenes, g.out, cam, ms, rc);
    std::cout << "rendered " << m.triplets.size() << " triplets ("
              << m.splits.train.size() << " train / " << m.splits.val.size()
              << " val / " << m.splits.test.size() << " test scenes)\n";
    return 0;
  }

  if (md->parsed()) {
    if (g.out.empty()) throw ConfigError("misalign-dataset requires --out");
    hp.seed = g.seed;
    hp.validate();
    DatasetManifest src = load_manifest(md_dataset);
    DatasetManifest out = misalign_dataset(src, g.out, hp);
    std::cout << "misaligned " << out.triplets.size() << " triplets into "
              << g.out << "\n";
    return 0;
  }

  if (ei->parsed()) {
    PlanarImage img = load_image(ei_image);
    EstimatorSpec spec = estimator_from_flags(ei_name, ei_p, ei_sigma, ei_order);
    IlluminantEstimate est =
        minkowski_estimate(img, spec, ei_full_scale.value_or(0.0));
    nlohmann::ordered_json j;
    j["estimator"] = spec.name;
    j["order"] = spec.derivative_order;
    j["p"] = spec.p_is_infinite() ? -1.0 : spec.minkowski_p;
    j["sigma"] = spec.smoothing_sigma;
    j["estimate"] = est.rgb;
    j["raw_magnitude"] = est.raw_magnitude;
    std::cout << j.dump(2) << "\n";
    return 0;
  }

  if (co->parsed()) {
    if (g.out.empty()) throw ConfigError("correct requires --out");
    PlanarImage img = load_image(co_image);
    PlanarImage xyz;
    if (co_mode == "traditional") {
      if (co_profile.empty())
        throw ConfigError("traditional mode requires --profile");
      CameraProfile profile = load_profile(co_profile);
      EstimatorSpec spec = estimator_from_flags(co_est, co_p, co_sigma, co_order);
      CorrectionRecord rec = traditional_correct(img, profile, spec);
      xyz = rec.xyz;
      nlohmann::ordered_json j;
      j["estimate"] = rec.estimate.rgb;
      j["cct_kelvin"] = rec.cct.kelvin;
      j["cct_clamped"] = rec.cct.clamped;
      j["cst"] = rec.cst.m;
      std::cout << j.dump(2) << "\n";
    } else if (co_mode == "kan") {
      if (co_ckpt.empty()) throw ConfigError("kan mode requires --ckpt");
      kan::Checkpoint ck = kan::load_checkpoint(co_ckpt);
      PlanarImage ms;
      if (!co_ms.empty()) {
        ms = load_image(co_ms);
      } else if (ck.params.spectral_features == 0) {
        // RGB-only checkpoints ignore the spectral input entirely.
        ms = PlanarImage(img.height, img.width, 1, ColorSpace::MsRaw);
      } else {
        throw ConfigError("kan mode requires --ms for this checkpoint");
      }
      xyz = kan::predict_image(ck.params, img, ms);
    } else {
      throw ConfigError("unknown correction mode: " + co_mode);
    }
    save_image(g.out, xyz);
    std::cout << "wrote " << g.out << "\n";
    return 0;
  }

  if (tk->parsed()) {
    if (g.out.empty()) throw ConfigError("train-kan requires --out (checkpoint)");
    kan::TrainConfig tc = train_config_from(cfg);
    if (!cfg.contains("seed")) tc.seed = g.seed;
    if (tk_rgb_only) tc.spectral_features = 0;
    if (tk_freeze_spectral)
      tc.freeze = {kan::ParamGroup::SplineCoeffs, kan::ParamGroup::Bypass,
                   kan::ParamGroup::Bias};
    DatasetManifest manifest = load_manifest(tk_manifest);
    std::optional<kan::KanParams> init;
    if (!tk_init.empty()) init = kan::load_checkpoint(tk_init).params;
    kan::TrainResult result = kan::train(manifest, tc, init ? &*init : nullptr);
    kan::save_checkpoint(g.out, result.params, train_config_hash(tc));
    if (!tk_log.empty()) write_text(tk_log, kan::log_to_json(result));
    std::cout << "best val de76 " << result.best_val << " at epoch "
              << result.best_epoch << " (" << result.log.size()
              << " epochs run); checkpoint: " << g.out << "\n";
    return 0;
  }

  if (ev->parsed()) {
    DatasetManifest manifest = load_manifest(ev_manifest);
    CameraProfile profile = load_profile(
        ev_profile.empty() ? manifest.resolve(manifest.profile_path)
                           : ev_profile);
    MethodSpec method = parse_method(
        ev_method == "traditional" ? "traditional-" + ev_est : ev_method,
        ev_ckpt);
    EvaluationReport report =
        evaluate_method(manifest, method, profile, ev_alpha, threads);
    std::cout << report_to_table(report);
    if (!g.out.empty()) {
      write_text(g.out, report_to_json(report));
      std::cout << "report: " << g.out << "\n";
    }
    return 0;
  }

  if (ax->parsed()) {
    DatasetManifest manifest = load_manifest(ax_manifest);
    CameraProfile profile = load_profile(
        ax_profile.empty() ? manifest.resolve(manifest.profile_path)
                           : ax_profile);
    std::vector<MethodSpec> methods;
    {
      std::stringstream ss(ax_methods);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) methods.push_back(parse_method(tok, ax_ckpt));
    }
    std::vector<double> alphas;
    {
      std::stringstream ss(ax_alphas);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) alphas.push_back(std::stod(tok));
    }
    auto table = run_exposure_ablation(manifest, methods, profile, alphas, threads);
    std::printf("%-22s %8s %14s %10s\n", "Method", "alpha", "Reproduction",
                "DeltaE00");
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& cell : table) {
      std::printf("%-22s %8.3f %14.4f %10.4f\n", cell.method.c_str(),
                  cell.alpha, cell.mean_reproduction, cell.mean_de00);
      rows.push_back({{"method", cell.method},
                      {"alpha", cell.alpha},
                      {"mean_reproduction", cell.mean_reproduction},
                      {"mean_de00", cell.mean_de00}});
    }
    if (!g.out.empty()) write_text(g.out, rows.dump(2) + "\n");
    return 0;
  }

  if (am->parsed()) {
    DatasetManifest aligned = load_manifest(am_aligned);
    DatasetManifest misaligned = load_manifest(am_misaligned);
    CameraProfile profile = load_profile(
        am_profile.empty() ? aligned.resolve(aligned.profile_path)
                           : am_profile);
    kan::TrainConfig ft = train_config_from(cfg);
    if (!cfg.contains("seed")) ft.seed = g.seed;
    MisalignmentReport rep = run_misalignment_experiment(
        aligned, misaligned, am_ckpt, profile, ft, threads);
    std::cout << "== unadapted on misaligned test ==\n"
              << report_to_table(rep.unadapted)
              << "== spectral-encoder fine-tuned ==\n"
              << report_to_table(rep.fine_tuned) << "mean DeltaE00 delta: "
              << rep.de00_delta << " (positive means fine-tuning helped)\n"
              << "frozen parameters bit-identical: "
              << (rep.frozen_params_identical ? "yes" : "no") << "\n";
    if (!g.out.empty()) {
      nlohmann::ordered_json j;
      j["unadapted"] = nlohmann::json::parse(report_to_json(rep.unadapted));
      j["fine_tuned"] = nlohmann::json::parse(report_to_json(rep.fine_tuned));
      j["de00_delta"] = rep.de00_delta;
      j["frozen_params_identical"] = rep.frozen_params_identical;
      write_text(g.out, j.dump(2) + "\n");
    }
    return 0;
  }

  if (ex->parsed()) {
    if (g.out.empty()) throw ConfigError("export-srgb requires --out");
    PlanarImage img = load_image(ex_image);
    save_png16(g.out, xyz_to_srgb_encode(img));
    std::cout << "wrote " << g.out << "\n";
    return 0;
  }

  throw ConfigError("no subcommand given");
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
