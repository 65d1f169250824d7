#pragma once

#include <string>
#include <vector>

#include "mscc/dataset.hpp"

namespace mscc {

/// HSC1 reflectance cube container (little-endian, f32 payload).
void save_cube(const std::string& path, const ReflectanceCube& cube);
ReflectanceCube load_cube(const std::string& path);

/// MCI1 multichannel image container (little-endian, f32 payload).
void save_image(const std::string& path, const PlanarImage& img);
PlanarImage load_image(const std::string& path);

/// 16-bit RGB PNG for srgb-encoded images.
void save_png16(const std::string& path, const PlanarImage& img);

void save_triplet_meta(const std::string& path, const TripletMeta& meta);
TripletMeta load_triplet_meta(const std::string& path);

struct TripletRef {
  std::string scene_id;
  std::string illuminant;
  std::string rgb_path;  // relative to the manifest directory
  std::string ms_path;
  std::string gt_path;
  std::string meta_path;
};

struct DatasetManifest {
  std::string root;  // directory holding the manifest, set on load
  WavelengthGrid grid;
  int ms_factor = 8;
  std::string camera_name;
  std::string profile_path;
  std::uint64_t seed = 0;
  SplitManifest splits;
  std::vector<TripletRef> triplets;

  std::string resolve(const std::string& rel) const;
  std::vector<const TripletRef*> partition(const std::string& which) const;
};

void save_manifest(const std::string& path, const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::string& path);

struct SceneSetConfig {
  int count = 24;
  int height = 128;
  int width = 128;
  int n_blobs = 6;
  bool white_patch = true;
  std::uint64_t seed = 1;
  WavelengthGrid grid;
};

/// Writes scene_####.hsc cubes plus a scenes.json index into out_dir.
std::vector<std::string> make_synthetic_scenes(const std::string& out_dir,
                                               const SceneSetConfig& config);

struct RenderConfig {
  int ms_factor = 8;
  int illuminant_count = 8;
  std::uint64_t split_seed = 7;
  std::string camera_name = "default-rgb";
  int threads = 1;
};

/// Renders every (scene, illuminant) triplet from a scene directory, builds
/// the camera profile from the synthetic chart, and writes the manifest.
DatasetManifest render_dataset(const std::string& scenes_dir,
                               const std::string& out_dir,
                               const SensitivitySet& camera_sens,
                               const SensitivitySet& ms_sens,
                               const RenderConfig& config);

/// Applies per-triplet random homographies to the MS images of an existing
/// dataset, writing warped MS files plus an updated manifest into out_dir.
/// RGB/GT files are referenced from the source dataset, not copied.
DatasetManifest misalign_dataset(const DatasetManifest& source,
                                 const std::string& out_dir,
                                 const HomographyParams& params);

}  // namespace mscc
