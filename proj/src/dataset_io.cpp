#include "mscc/dataset_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "mscc/cie_data.hpp"
#include "mscc/parallel.hpp"
#include "mscc/rng.hpp"
#include "mscc/spectral_io.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace mscc {

namespace {

void write_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_bytes(std::ifstream& in, void* p, std::size_t n,
                const std::string& path) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw DataError(path + ": truncated file");
}

void write_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  write_bytes(out, b, 4);
}

std::uint32_t read_u32(std::ifstream& in, const std::string& path) {
  unsigned char b[4];
  read_bytes(in, b, 4, path);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32(std::ofstream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(out, bits);
}

float read_f32(std::ifstream& in, const std::string& path) {
  std::uint32_t bits = read_u32(in, path);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

void write_f32_plane(std::ofstream& out, const double* src, std::size_t n) {
  std::vector<float> buf(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = static_cast<float>(src[i]);
  // Assumes little-endian float storage, which matches every target this
  // builds on; the scalar header fields go through the explicit path.
  write_bytes(out, buf.data(), n * 4);
}

void read_f32_plane(std::ifstream& in, double* dst, std::size_t n,
                    const std::string& path) {
  std::vector<float> buf(n);
  read_bytes(in, buf.data(), n * 4, path);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(buf[i]))
      throw DataError(path + ": non-finite payload value");
    dst[i] = static_cast<double>(buf[i]);
  }
}

void check_magic(std::ifstream& in, const char* expected,
                 const std::string& path) {
  char got[5] = {0};
  read_bytes(in, got, 4, path);
  if (std::memcmp(got, expected, 4) != 0)
    throw DataError(path + ": bad magic, expected '" + expected + "', found '" +
                    std::string(got, 4) + "'");
}

void expect_eof(std::ifstream& in, const std::string& path) {
  char c;
  in.read(&c, 1);
  if (!in.eof()) throw DataError(path + ": trailing bytes after payload");
}

}  // namespace

void save_cube(const std::string& path, const ReflectanceCube& cube) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write cube file: " + path);
  write_bytes(out, "HSC1", 4);
  write_u32(out, static_cast<std::uint32_t>(cube.height));
  write_u32(out, static_cast<std::uint32_t>(cube.width));
  write_u32(out, static_cast<std::uint32_t>(cube.grid.count));
  write_f32(out, static_cast<float>(cube.grid.lambda_min));
  write_f32(out, static_cast<float>(cube.grid.step));
  write_f32_plane(out, cube.planes.data(), cube.planes.size());
  write_bytes(out, cube.mask.data(), cube.mask.size());
  if (!out) throw DataError("write failed: " + path);
}

ReflectanceCube load_cube(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open cube file: " + path);
  check_magic(in, "HSC1", path);
  std::uint32_t h = read_u32(in, path);
  std::uint32_t w = read_u32(in, path);
  std::uint32_t b = read_u32(in, path);
  float lmin = read_f32(in, path);
  float step = read_f32(in, path);
  if (h == 0 || w == 0 || b == 0 || !(step > 0.0f))
    throw DataError(path + ": invalid cube dimensions");
  WavelengthGrid grid(lmin, lmin + step * (b - 1), step);
  if (grid.count != static_cast<int>(b))
    throw DataError(path + ": inconsistent band count");
  ReflectanceCube cube(static_cast<int>(h), static_cast<int>(w), grid);
  read_f32_plane(in, cube.planes.data(), cube.planes.size(), path);
  read_bytes(in, cube.mask.data(), cube.mask.size(), path);
  expect_eof(in, path);
  for (auto& m : cube.mask)
    if (m > 1) throw DataError(path + ": mask bytes must be 0 or 1");
  return cube;
}

void save_image(const std::string& path, const PlanarImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write image file: " + path);
  write_bytes(out, "MCI1", 4);
  write_u32(out, static_cast<std::uint32_t>(img.height));
  write_u32(out, static_cast<std::uint32_t>(img.width));
  write_u32(out, static_cast<std::uint32_t>(img.channels()));
  unsigned char code = static_cast<unsigned char>(img.space);
  write_bytes(out, &code, 1);
  write_f32_plane(out, img.data.data(), img.data.size());
  write_bytes(out, img.mask.data(), img.mask.size());
  if (!out) throw DataError("write failed: " + path);
}

PlanarImage load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image file: " + path);
  check_magic(in, "MCI1", path);
  std::uint32_t h = read_u32(in, path);
  std::uint32_t w = read_u32(in, path);
  std::uint32_t c = read_u32(in, path);
  unsigned char code;
  read_bytes(in, &code, 1, path);
  if (h == 0 || w == 0 || c == 0)
    throw DataError(path + ": invalid image dimensions");
  if (code > 4) throw DataError(path + ": unknown color-space code");
  PlanarImage img(static_cast<int>(h), static_cast<int>(w),
                  static_cast<int>(c), static_cast<ColorSpace>(code));
  read_f32_plane(in, img.data.data(), img.data.size(), path);
  read_bytes(in, img.mask.data(), img.mask.size(), path);
  expect_eof(in, path);
  for (auto& m : img.mask)
    if (m > 1) throw DataError(path + ": mask bytes must be 0 or 1");
  return img;
}

void save_png16(const std::string& path, const PlanarImage& img) {
  if (img.space != ColorSpace::SrgbEncoded)
    throw DataError("png export: image must be srgb-encoded");
  if (img.channels() != 3) throw DataError("png export: need 3 channels");
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw DataError("cannot write png file: " + path);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw DataError("png export: libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw DataError("png export: libpng write error for " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, img.width, img.height, 16, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_uint_16> row(static_cast<std::size_t>(img.width) * 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) {
        double v = std::clamp(img.at(c, y, x), 0.0, 1.0);
        row[static_cast<std::size_t>(x) * 3 + c] =
            static_cast<png_uint_16>(std::lround(v * 65535.0));
      }
    // PNG 16-bit samples are big-endian; swap on the way out.
    std::vector<unsigned char> bytes(row.size() * 2);
    for (std::size_t i = 0; i < row.size(); ++i) {
      bytes[2 * i] = static_cast<unsigned char>(row[i] >> 8);
      bytes[2 * i + 1] = static_cast<unsigned char>(row[i] & 0xff);
    }
    png_write_row(png, bytes.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

void save_triplet_meta(const std::string& path, const TripletMeta& meta) {
  nlohmann::ordered_json j;
  j["scene_id"] = meta.scene_id;
  j["illuminant"] = meta.illuminant;
  j["camera"] = meta.camera;
  j["gt_illuminant_rgb"] = meta.gt_illuminant_rgb;
  j["homography"] = meta.homography;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write metadata: " + path);
  out << j.dump(2) << '\n';
}

TripletMeta load_triplet_meta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open metadata: " + path);
  nlohmann::json j;
  try {
    in >> j;
    TripletMeta meta;
    meta.scene_id = j.at("scene_id").get<std::string>();
    meta.illuminant = j.at("illuminant").get<std::string>();
    meta.camera = j.at("camera").get<std::string>();
    meta.gt_illuminant_rgb = j.at("gt_illuminant_rgb").get<std::vector<double>>();
    auto hv = j.at("homography").get<std::vector<double>>();
    if (hv.size() != 9) throw DataError(path + ": homography needs 9 entries");
    std::copy(hv.begin(), hv.end(), meta.homography.begin());
    return meta;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": bad metadata: " + e.what());
  }
}

std::string DatasetManifest::resolve(const std::string& rel) const {
  if (rel.empty()) return rel;
  fs::path p(rel);
  if (p.is_absolute()) return rel;
  return (fs::path(root) / p).string();
}

std::vector<const TripletRef*> DatasetManifest::partition(
    const std::string& which) const {
  const std::vector<std::string>* ids = nullptr;
  if (which == "train") ids = &splits.train;
  else if (which == "val") ids = &splits.val;
  else if (which == "test") ids = &splits.test;
  else throw ConfigError("unknown partition: " + which);
  std::vector<const TripletRef*> out;
  for (const TripletRef& t : triplets)
    if (std::find(ids->begin(), ids->end(), t.scene_id) != ids->end())
      out.push_back(&t);
  return out;
}

void save_manifest(const std::string& path, const DatasetManifest& manifest) {
  nlohmann::ordered_json j;
  j["grid"] = {{"lambda_min", manifest.grid.lambda_min},
               {"lambda_max", manifest.grid.lambda_max},
               {"step", manifest.grid.step}};
  j["ms_factor"] = manifest.ms_factor;
  j["camera"] = manifest.camera_name;
  j["profile"] = manifest.profile_path;
  j["seed"] = manifest.seed;
  j["splits"] = {{"seed", manifest.splits.seed},
                 {"train", manifest.splits.train},
                 {"val", manifest.splits.val},
                 {"test", manifest.splits.test}};
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const TripletRef& t : manifest.triplets) {
    arr.push_back({{"scene_id", t.scene_id},
                   {"illuminant", t.illuminant},
                   {"rgb", t.rgb_path},
                   {"ms", t.ms_path},
                   {"gt", t.gt_path},
                   {"meta", t.meta_path}});
  }
  j["triplets"] = std::move(arr);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest: " + path);
  out << j.dump(2) << '\n';
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);
  nlohmann::json j;
  try {
    in >> j;
    DatasetManifest m;
    m.root = fs::path(path).parent_path().string();
    if (m.root.empty()) m.root = ".";
    m.grid = WavelengthGrid(j.at("grid").at("lambda_min").get<double>(),
                            j.at("grid").at("lambda_max").get<double>(),
                            j.at("grid").at("step").get<double>());
    m.ms_factor = j.at("ms_factor").get<int>();
    m.camera_name = j.at("camera").get<std::string>();
    m.profile_path = j.at("profile").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.splits.seed = j.at("splits").at("seed").get<std::uint64_t>();
    m.splits.train = j.at("splits").at("train").get<std::vector<std::string>>();
    m.splits.val = j.at("splits").at("val").get<std::vector<std::string>>();
    m.splits.test = j.at("splits").at("test").get<std::vector<std::string>>();
    for (const auto& t : j.at("triplets")) {
      TripletRef r;
      r.scene_id = t.at("scene_id").get<std::string>();
      r.illuminant = t.at("illuminant").get<std::string>();
      r.rgb_path = t.at("rgb").get<std::string>();
      r.ms_path = t.at("ms").get<std::string>();
      r.gt_path = t.at("gt").get<std::string>();
      r.meta_path = t.at("meta").get<std::string>();
      m.triplets.push_back(std::move(r));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": bad manifest: " + e.what());
  }
}

std::vector<std::string> make_synthetic_scenes(const std::string& out_dir,
                                               const SceneSetConfig& config) {
  if (config.count < 1) throw ConfigError("scene set: count must be positive");
  fs::create_directories(out_dir);
  std::vector<std::string> ids;
  nlohmann::ordered_json index;
  index["seed"] = config.seed;
  index["count"] = config.count;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (int i = 0; i < config.count; ++i) {
    char sid[32];
    std::snprintf(sid, sizeof(sid), "scene_%04d", i);
    ReflectanceCube cube =
        synth_scene(mix_seed(config.seed, static_cast<std::uint64_t>(i)),
                    config.height, config.width, config.grid, config.n_blobs,
                    config.white_patch);
    std::string file = std::string(sid) + ".hsc";
    save_cube((fs::path(out_dir) / file).string(), cube);
    ids.emplace_back(sid);
    arr.push_back({{"scene_id", sid}, {"cube", file}, {"source", "synthetic"}});
  }
  index["scenes"] = std::move(arr);
  std::ofstream out(fs::path(out_dir) / "scenes.json");
  if (!out) throw DataError("cannot write scene index in " + out_dir);
  out << index.dump(2) << '\n';
  return ids;
}

DatasetManifest render_dataset(const std::string& scenes_dir,
                               const std::string& out_dir,
                               const SensitivitySet& camera_sens,
                               const SensitivitySet& ms_sens,
                               const RenderConfig& config) {
  std::ifstream idx(fs::path(scenes_dir) / "scenes.json");
  if (!idx) throw DataError("cannot open scene index in " + scenes_dir);
  nlohmann::json j;
  idx >> j;
  struct SceneEntry {
    std::string id, file;
  };
  std::vector<SceneEntry> scenes;
  for (const auto& s : j.at("scenes"))
    scenes.push_back({s.at("scene_id").get<std::string>(),
                      s.at("cube").get<std::string>()});
  if (scenes.empty()) throw DataError("scene index is empty");

  // One probe cube pins the grid; every spectral input is resampled to it.
  ReflectanceCube probe =
      load_cube((fs::path(scenes_dir) / scenes.front().file).string());
  const WavelengthGrid grid = probe.grid;

  Spectrum d65 = cie_d65(grid);
  // Fixed exposure gains and relative colorimetry: raw channels sit at order
  // one, and a perfect reflector under D65 renders to Y = 1.
  SensitivitySet cam = normalize_exposure(resample_sensitivities(camera_sens, grid));
  SensitivitySet ms = normalize_exposure(resample_sensitivities(ms_sens, grid));
  SensitivitySet cmf = normalize_xyz_luminance(cie1931_cmf(grid), d65);
  std::vector<Spectrum> bank =
      default_illuminant_bank(grid, config.illuminant_count);

  CameraProfile profile = build_camera_profile(
      config.camera_name, cam, standard_chart24(grid), cmf, d65);

  fs::create_directories(fs::path(out_dir) / "triplets");
  save_sensitivities_csv((fs::path(out_dir) / "camera_sensitivities.csv").string(), cam);
  {
    std::ofstream pf(fs::path(out_dir) / "profile.json");
    if (!pf) throw DataError("cannot write profile in " + out_dir);
    pf << profile_to_json(profile, "camera_sensitivities.csv");
  }

  DatasetManifest manifest;
  manifest.root = out_dir;
  manifest.grid = grid;
  manifest.ms_factor = config.ms_factor;
  manifest.camera_name = config.camera_name;
  manifest.profile_path = "profile.json";
  manifest.seed = config.split_seed;

  std::vector<std::string> ids;
  for (const auto& s : scenes) ids.push_back(s.id);
  manifest.splits = make_splits(ids, config.split_seed);

  manifest.triplets.resize(scenes.size() * bank.size());
  parallel_for_indexed(scenes.size(), config.threads, [&](std::size_t si) {
    ReflectanceCube cube =
        load_cube((fs::path(scenes_dir) / scenes[si].file).string());
    if (cube.grid != grid)
      throw DataError("scene " + scenes[si].id + " uses a different grid");
    SceneRecord record{scenes[si].id, std::move(cube), "synthetic", ""};
    for (std::size_t li = 0; li < bank.size(); ++li) {
      Triplet t = generate_triplet(record, bank[li], profile, ms, cmf, d65,
                                   config.ms_factor);
      std::string base = record.scene_id + "__" + bank[li].name;
      TripletRef ref;
      ref.scene_id = record.scene_id;
      ref.illuminant = bank[li].name;
      ref.rgb_path = "triplets/" + base + ".rgb.mci";
      ref.ms_path = "triplets/" + base + ".ms.mci";
      ref.gt_path = "triplets/" + base + ".gt.mci";
      ref.meta_path = "triplets/" + base + ".json";
      save_image((fs::path(out_dir) / ref.rgb_path).string(), t.rgb);
      save_image((fs::path(out_dir) / ref.ms_path).string(), t.ms);
      save_image((fs::path(out_dir) / ref.gt_path).string(), t.gt);
      save_triplet_meta((fs::path(out_dir) / ref.meta_path).string(), t.meta);
      manifest.triplets[si * bank.size() + li] = std::move(ref);
    }
  });

  save_manifest((fs::path(out_dir) / "manifest.json").string(), manifest);
  return load_manifest((fs::path(out_dir) / "manifest.json").string());
}

DatasetManifest misalign_dataset(const DatasetManifest& source,
                                 const std::string& out_dir,
                                 const HomographyParams& params) {
  params.validate();
  fs::create_directories(fs::path(out_dir) / "triplets");

  DatasetManifest out = source;
  out.root = out_dir;
  // Keep referring to the source rgb/gt payloads; only MS changes.
  fs::path src_root(source.root);
  for (std::size_t i = 0; i < out.triplets.size(); ++i) {
    TripletRef& ref = out.triplets[i];
    PlanarImage ms = load_image(source.resolve(ref.ms_path));
    Mat3 h = sample_homography(params, i, ms.height, ms.width);
    PlanarImage warped = warp_ms(ms, h);

    TripletMeta meta = load_triplet_meta(source.resolve(ref.meta_path));
    std::copy(h.m.begin(), h.m.end(), meta.homography.begin());

    std::string base = ref.scene_id + "__" + ref.illuminant;
    std::string new_ms = "triplets/" + base + ".ms.mci";
    std::string new_meta = "triplets/" + base + ".json";
    save_image((fs::path(out_dir) / new_ms).string(), warped);
    save_triplet_meta((fs::path(out_dir) / new_meta).string(), meta);

    ref.rgb_path = fs::absolute(src_root / ref.rgb_path).string();
    ref.gt_path = fs::absolute(src_root / ref.gt_path).string();
    ref.ms_path = new_ms;
    ref.meta_path = new_meta;
  }
  out.profile_path = fs::absolute(src_root / source.profile_path).string();
  save_manifest((fs::path(out_dir) / "manifest.json").string(), out);
  return load_manifest((fs::path(out_dir) / "manifest.json").string());
}

}  // namespace mscc
