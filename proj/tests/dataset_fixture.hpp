#pragma once

// On-disk dataset fixtures shared by the training and evaluation suites.

#include <filesystem>
#include <string>

#include "mscc/dataset.hpp"
#include "mscc/dataset_io.hpp"
#include "mscc/rng.hpp"

namespace fixtures {

/// Identity-task dataset: gt carries exactly the rgb payload (tagged xyz),
/// so a pointwise identity map is the global optimum.
inline mscc::DatasetManifest make_identity_dataset(const std::string& dir,
                                                   int scenes = 6, int size = 16,
                                                   int ms_factor = 4) {
  namespace fs = std::filesystem;
  fs::remove_all(dir);
  fs::create_directories(fs::path(dir) / "triplets");

  mscc::DatasetManifest m;
  m.root = dir;
  m.grid = mscc::WavelengthGrid(400, 700, 10);
  m.ms_factor = ms_factor;
  m.camera_name = "identity-fixture";
  m.profile_path = "";
  m.seed = 1;

  std::vector<std::string> ids;
  for (int s = 0; s < scenes; ++s) {
    std::string sid = "scene_" + std::to_string(s);
    ids.push_back(sid);
    mscc::Rng rng(1000 + s);
    mscc::PlanarImage rgb(size, size, 3, mscc::ColorSpace::CameraRaw);
    // Smooth-ish content over a moderate range; identity stays well inside
    // the spline grid's resolution there.
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
          rgb.at(c, y, x) =
              0.05 + 0.55 * std::abs(std::sin(0.3 * x + 0.5 * y + 2.1 * c +
                                              0.7 * static_cast<double>(s))) *
                         rng.uniform(0.9, 1.0);
    mscc::PlanarImage gt = rgb;
    gt.space = mscc::ColorSpace::Xyz;
    // MS context derived from the scene content (averaged rgb channels with
    // per-channel gains), mirroring how real captures correlate.
    mscc::PlanarImage rgb_small = mscc::downsample_area(rgb, ms_factor);
    mscc::PlanarImage ms(size / ms_factor, size / ms_factor, 15,
                         mscc::ColorSpace::MsRaw);
    for (int c = 0; c < 15; ++c) {
      double gain = 0.4 + 0.08 * c;
      for (int y = 0; y < ms.height; ++y)
        for (int x = 0; x < ms.width; ++x)
          ms.at(c, y, x) = gain * rgb_small.at(c % 3, y, x);
    }

    mscc::TripletRef ref;
    ref.scene_id = sid;
    ref.illuminant = "none";
    ref.rgb_path = "triplets/" + sid + ".rgb.mci";
    ref.ms_path = "triplets/" + sid + ".ms.mci";
    ref.gt_path = "triplets/" + sid + ".gt.mci";
    ref.meta_path = "";
    mscc::save_image((fs::path(dir) / ref.rgb_path).string(), rgb);
    mscc::save_image((fs::path(dir) / ref.ms_path).string(), ms);
    mscc::save_image((fs::path(dir) / ref.gt_path).string(), gt);
    m.triplets.push_back(ref);
  }
  m.splits = mscc::make_splits(ids, 3);
  return m;
}

/// Physically rendered tiny dataset through the normal generation path.
inline mscc::DatasetManifest make_rendered_dataset(const std::string& scenes_dir,
                                                   const std::string& out_dir,
                                                   int scenes = 8, int size = 32,
                                                   int illuminants = 4,
                                                   int ms_factor = 4,
                                                   std::uint64_t seed = 21) {
  namespace fs = std::filesystem;
  fs::remove_all(scenes_dir);
  fs::remove_all(out_dir);
  mscc::SceneSetConfig sc;
  sc.count = scenes;
  sc.height = size;
  sc.width = size;
  sc.n_blobs = 4;
  sc.seed = seed;
  sc.grid = mscc::WavelengthGrid(400, 700, 10);
  mscc::make_synthetic_scenes(scenes_dir, sc);

  mscc::RenderConfig rc;
  rc.ms_factor = ms_factor;
  rc.illuminant_count = illuminants;
  rc.split_seed = seed + 1;
  rc.threads = 2;
  return mscc::render_dataset(
      scenes_dir, out_dir, mscc::default_rgb_sensitivities(sc.grid),
      mscc::gaussian_ms_sensitivities(sc.grid), rc);
}

}  // namespace fixtures
