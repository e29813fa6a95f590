#pragma once

// Record realization (simulate, render, encode) and the on-disk dataset:
//
//   root/manifest.jsonl                 one record per line, index order
//   root/<id>/first_frame.png
//   root/<id>/frames/frame_%04d.png
//   root/<id>/control/control.fpct      only when materialized
//   root/<id>/states.jsonl              one world state per frame
//   root/<id>/prompt.txt

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "forceforge/encoder.hpp"
#include "forceforge/parallel.hpp"
#include "forceforge/render.hpp"
#include "forceforge/scenes.hpp"
#include "forceforge/tensor_io.hpp"

namespace forceforge {

namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;
inline constexpr double kDefaultBlobRadius = 20.0;

// ---------------------------------------------------------------------------
// Simulation of a scene spec

struct SimulationResult {
  SceneGeometry geometry;
  std::vector<SceneState> states;  // one per frame
  std::vector<ojson> state_lines;  // ground truth, one per frame
};

namespace detail {

inline ojson pixel_or_null(const CameraModel& cam, const Vec3& p) {
  try {
    auto [u, v] = project_point(cam, p);
    return ojson::array({u, v});
  } catch (const BehindCamera&) {
    return nullptr;
  }
}

}  // namespace detail

inline SimulationResult simulate_scene(const SceneSpec& spec, const VideoDims& dims) {
  SimulationResult r;
  r.states.reserve(static_cast<std::size_t>(dims.frames));
  auto frame_header = [&](int f) { return ojson{{"frame", f}, {"t", f / dims.fps}}; };

  if (const auto* fs = std::get_if<FlagSceneSpec>(&spec)) {
    const auto cam = fs->camera.model(dims);
    r.geometry.ground_texture = fs->ground_texture;
    r.geometry.backdrop = fs->backdrop;
    WindField wind{fs->wind_speed, fs->wind_direction_deg, {fs->gust_amplitude, 1.0}, fs->gust_seed};
    std::vector<std::vector<ClothState>> series;
    for (const auto& p : fs->flags) {
      r.geometry.flag_colors.push_back(p.color_id);
      series.push_back(simulate_cloth(make_flag_cloth(p), wind, SimClock::for_dims(dims, kClothSubsteps)));
    }
    for (int f = 0; f < dims.frames; ++f) {
      std::vector<ClothState> frame;
      ojson line = frame_header(f);
      ojson flags = ojson::array();
      for (const auto& s : series) {
        const auto& c = s[static_cast<std::size_t>(f)];
        ojson edge = ojson::array();
        for (int row = 0; row < c.rows; ++row) edge.push_back(to_json(c.vertex(row, c.cols - 1).position));
        flags.push_back({{"free_edge", edge}, {"free_edge_pixel", detail::pixel_or_null(cam, c.vertex(0, c.cols - 1).position)}});
        frame.push_back(c);
      }
      line["flags"] = flags;
      r.state_lines.push_back(std::move(line));
      r.states.emplace_back(std::move(frame));
    }
    return r;
  }

  if (const auto* bs = std::get_if<BallSceneSpec>(&spec)) {
    const auto cam = bs->camera.model(dims);
    r.geometry.ground_texture = bs->ground_texture;
    r.geometry.backdrop = bs->backdrop;
    std::vector<BallState> balls;
    for (const auto& b : bs->balls) {
      balls.push_back(make_ball(b.material, b.x, b.y));
      r.geometry.ball_colors.push_back(b.color_id);
    }
    const auto frames = simulate_ball(balls, bs->target, {bs->force_magnitude, bs->force_angle_deg},
                                      SimClock::for_dims(dims));
    for (int f = 0; f < dims.frames; ++f) {
      const auto& fr = frames[static_cast<std::size_t>(f)];
      ojson line = frame_header(f);
      ojson arr = ojson::array();
      for (const auto& b : fr)
        arr.push_back({{"position", to_json(b.position)},
                       {"velocity", to_json(b.velocity)},
                       {"pixel", detail::pixel_or_null(cam, b.position)}});
      line["balls"] = arr;
      r.state_lines.push_back(std::move(line));
      r.states.emplace_back(fr);
    }
    return r;
  }

  const auto& ps = std::get<PlantSceneSpec>(spec);
  const auto cam = ps.camera.model(dims);
  r.geometry.ground_texture = ps.ground_texture;
  r.geometry.backdrop = ps.backdrop;
  const auto series = simulate_chain(make_plant(plant_base(), PlantRanges{}.segments),
                                     {ps.force_magnitude, ps.force_angle_deg, ps.contact_segment},
                                     SimClock::for_dims(dims));
  for (int f = 0; f < dims.frames; ++f) {
    const auto& c = series[static_cast<std::size_t>(f)];
    ojson line = frame_header(f);
    ojson angles = ojson::array(), rates = ojson::array();
    for (const auto& s : c.segments) {
      angles.push_back(s.angle);
      rates.push_back(s.angular_velocity);
    }
    const Vec3 tip = c.node_positions().back();
    line["angles"] = angles;
    line["angular_velocities"] = rates;
    line["tip"] = to_json(tip);
    line["tip_pixel"] = detail::pixel_or_null(cam, tip);
    r.state_lines.push_back(std::move(line));
    r.states.emplace_back(c);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Records

struct RecordPaths {
  std::string frames_dir, first_frame, states, prompt;
  std::optional<std::string> control_dir;

  bool operator==(const RecordPaths&) const = default;
};

struct VideoRecord {
  int schema_version = kSchemaVersion;
  std::string id;
  Scenario scenario = Scenario::ball;
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  ForceParams force;  // pixel space of `dims`
  BlobParams blob;
  CameraDraw camera;
  SceneSpec spec;
  TextPrompt prompt;
  RecordPaths paths;
  VideoDims dims;
  AblationConfig ablation;
  std::string generator_version = kGeneratorVersion;
  std::string catalog_version = kCatalogVersion;

  bool operator==(const VideoRecord&) const = default;
};

inline std::string record_id(Scenario s, std::uint64_t index) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s_%06llu", to_string(s), static_cast<unsigned long long>(index));
  return buf;
}

inline CameraDraw camera_of(const SceneSpec& spec) {
  return std::visit([](const auto& s) { return s.camera; }, spec);
}

// Regenerates the control tensor from a record's stored parameters.
inline ControlTensor record_control(const VideoRecord& r) {
  if (r.force.kind == EncodingKind::global)
    return encode_global(GlobalForcePrompt::create(r.force.magnitude, r.force.angle_deg), r.dims);
  return encode_local(LocalForcePrompt::create(r.force.x, r.force.y, r.force.magnitude, r.force.angle_deg, r.dims),
                      r.dims, r.blob);
}

inline ojson to_json(const BlobParams& b) {
  return {{"radius", b.radius}, {"sigma", b.sigma}, {"truncation", b.truncation}};
}
inline BlobParams blob_from_json(const ojson& j) {
  BlobParams b{j.at("radius").get<double>(), j.at("sigma").get<double>(), j.at("truncation").get<double>()};
  b.validate();
  return b;
}

inline ojson to_json(const VideoRecord& r) {
  ojson paths{{"frames_dir", r.paths.frames_dir},
              {"first_frame", r.paths.first_frame},
              {"states", r.paths.states},
              {"prompt", r.paths.prompt},
              {"control_dir", r.paths.control_dir ? ojson(*r.paths.control_dir) : ojson(nullptr)}};
  return {{"schema_version", r.schema_version},
          {"id", r.id},
          {"scenario", to_string(r.scenario)},
          {"index", r.index},
          {"seed", r.seed},
          {"force", to_json(r.force)},
          {"blob", to_json(r.blob)},
          {"camera", to_json(r.camera)},
          {"spec", to_json(r.spec)},
          {"prompt", {{"text", r.prompt.text}, {"contains_keywords", r.prompt.contains_keywords}}},
          {"paths", paths},
          {"dims", to_json(r.dims)},
          {"ablation", to_json(r.ablation)},
          {"generator_version", r.generator_version},
          {"catalog_version", r.catalog_version}};
}

inline VideoRecord record_from_json(const ojson& j) {
  VideoRecord r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != kSchemaVersion)
    throw Error("unsupported schema version " + std::to_string(r.schema_version));
  r.id = j.at("id").get<std::string>();
  r.scenario = parse_scenario(j.at("scenario").get<std::string>());
  r.index = j.at("index").get<std::uint64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.force = force_from_json(j.at("force"));
  r.blob = blob_from_json(j.at("blob"));
  r.camera = camera_from_json(j.at("camera"));
  r.spec = spec_from_json(r.scenario, j.at("spec"));
  r.prompt = {j.at("prompt").at("text").get<std::string>(), j.at("prompt").at("contains_keywords").get<bool>()};
  const auto& p = j.at("paths");
  r.paths.frames_dir = p.at("frames_dir").get<std::string>();
  r.paths.first_frame = p.at("first_frame").get<std::string>();
  r.paths.states = p.at("states").get<std::string>();
  r.paths.prompt = p.at("prompt").get<std::string>();
  if (!p.at("control_dir").is_null()) r.paths.control_dir = p.at("control_dir").get<std::string>();
  r.dims = dims_from_json(j.at("dims"));
  r.ablation = ablation_from_json(j.at("ablation"));
  r.generator_version = j.at("generator_version").get<std::string>();
  r.catalog_version = j.at("catalog_version").get<std::string>();
  return r;
}

struct RecordOptions {
  double scale = 1.0;
  bool materialize_control = false;
  RenderOptions render{};
  int frame_threads = 1;
};

struct RealizedRecord {
  VideoRecord meta;
  std::vector<Image> frames;
  std::vector<ojson> state_lines;
};

inline RealizedRecord realize_record(const PlanEntry& e, const Plan& plan, const RecordOptions& opt = {}) {
  const VideoDims dims = opt.scale == 1.0 ? plan.dims : plan.dims.scaled(opt.scale);
  RealizedRecord out;
  auto& m = out.meta;
  m.id = record_id(e.scenario(), e.index);
  m.scenario = e.scenario();
  m.index = e.index;
  m.seed = e.seed;
  m.force = e.force;
  if (e.force.kind == EncodingKind::local) {
    const auto p = LocalForcePrompt::create(e.force.x, e.force.y, e.force.magnitude, e.force.angle_deg, plan.dims)
                       .rescaled(plan.dims, dims);
    m.force.x = p.x();
    m.force.y = p.y();
  }
  m.blob = BlobParams::from_radius(kDefaultBlobRadius * static_cast<double>(dims.width) / plan.dims.width);
  m.camera = camera_of(e.spec);
  m.spec = e.spec;
  m.prompt = e.prompt;
  m.dims = dims;
  m.ablation = plan.ablation;
  m.paths = {m.id + "/frames", m.id + "/first_frame.png", m.id + "/states.jsonl", m.id + "/prompt.txt",
             opt.materialize_control ? std::optional<std::string>(m.id + "/control") : std::nullopt};

  auto sim = simulate_scene(e.spec, dims);
  out.frames = render_clip(sim.geometry, sim.states, m.camera.model(dims), opt.frame_threads, opt.render);
  out.state_lines = std::move(sim.state_lines);
  return out;
}

namespace detail {

inline void write_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path, reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
}

inline std::string read_text(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

}  // namespace detail

// Writes root/<id>/ through a temporary sibling directory and a rename, so a
// failure never leaves a partial record behind. Returns the manifest line.
inline std::string write_record(const RealizedRecord& rec, const fs::path& root) {
  const auto& m = rec.meta;
  if (static_cast<int>(rec.frames.size()) != m.dims.frames) throw InvalidArgument(m.id + ": frame count mismatch");
  const fs::path final_dir = root / m.id;
  const fs::path tmp = root / (".tmp-" + m.id);
  std::error_code ec;
  fs::remove_all(tmp, ec);
  try {
    fs::create_directories(tmp / "frames");
    for (std::size_t i = 0; i < rec.frames.size(); ++i)
      write_png(tmp / "frames" / frame_filename(static_cast<int>(i)), rec.frames[i]);
    write_png(tmp / "first_frame.png", rec.frames.front());
    std::string states;
    for (const auto& l : rec.state_lines) states += l.dump() + "\n";
    detail::write_text(tmp / "states.jsonl", states);
    detail::write_text(tmp / "prompt.txt", m.prompt.text + "\n");
    if (m.paths.control_dir) {
      fs::create_directories(tmp / "control");
      write_fpct(tmp / "control" / "control.fpct", record_control(m));
    }
    fs::remove_all(final_dir);
    fs::rename(tmp, final_dir);
  } catch (const fs::filesystem_error& e) {
    fs::remove_all(tmp, ec);
    throw IoError(e.path1().string(), e.what());
  } catch (...) {
    fs::remove_all(tmp, ec);
    throw;
  }
  return to_json(m).dump();
}

// Serializes appends from concurrent writers.
class ManifestWriter {
 public:
  explicit ManifestWriter(const fs::path& path, bool truncate = true) : path_(path) {
    std::ofstream out(path_, truncate ? std::ios::trunc : std::ios::app);
    if (!out) throw IoError(path_.string(), "cannot open manifest");
  }

  void append(const std::string& line) {
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    out << line << '\n';
    if (!out) throw IoError(path_.string(), "manifest append failed");
  }

 private:
  fs::path path_;
  std::mutex mutex_;
};

inline std::vector<VideoRecord> load_manifest(const fs::path& root) {
  const fs::path path = root / "manifest.jsonl";
  if (!fs::exists(path)) throw IoError(path.string(), "manifest not found");
  std::istringstream in(detail::read_text(path));
  std::vector<VideoRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(ojson::parse(line)));
    } catch (const std::exception& e) {
      throw IoError(path.string(), "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

struct GenerateOptions {
  RecordOptions record{};
  int parallelism = 1;
  std::function<void(const std::string& id, bool ok)> progress;
};

struct GenerateReport {
  std::vector<std::string> written;
  std::vector<std::pair<std::string, std::string>> failures;  // id, message
};

// Realizes and writes every plan entry. Records are processed in parallel;
// the manifest lists successful records in index order.
inline GenerateReport generate_dataset(const Plan& plan, const fs::path& root, const GenerateOptions& opt = {}) {
  fs::create_directories(root);
  const std::size_t n = plan.entries.size();
  std::vector<std::optional<std::string>> lines(n);
  std::vector<std::string> errors(n);
  std::mutex progress_mutex;
  parallel_for(n, opt.parallelism, [&](std::size_t i) {
    const auto& e = plan.entries[i];
    try {
      lines[i] = write_record(realize_record(e, plan, opt.record), root);
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
    }
    if (opt.progress) {
      std::lock_guard lock(progress_mutex);
      opt.progress(record_id(e.scenario(), e.index), lines[i].has_value());
    }
  });
  GenerateReport report;
  ManifestWriter manifest(root / "manifest.jsonl");
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = record_id(plan.entries[i].scenario(), plan.entries[i].index);
    if (lines[i]) {
      manifest.append(*lines[i]);
      report.written.push_back(id);
    } else {
      report.failures.emplace_back(id, errors[i]);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Validation

struct Finding {
  std::string id;
  std::string path;
  std::string message;
};

struct ValidationReport {
  std::size_t records_checked = 0;
  std::vector<Finding> findings;

  bool ok() const { return findings.empty(); }
};

inline ValidationReport validate_dataset(const fs::path& root) {
  ValidationReport rep;
  const auto records = load_manifest(root);
  for (const auto& r : records) {
    ++rep.records_checked;
    auto add = [&](const fs::path& p, const std::string& msg) { rep.findings.push_back({r.id, p.string(), msg}); };

    const fs::path first = root / r.paths.first_frame;
    if (!fs::exists(first)) {
      add(first, "missing first frame");
    } else {
      try {
        const auto img = read_png(first);
        if (img.width != r.dims.width || img.height != r.dims.height) add(first, "first frame size does not match dims");
      } catch (const std::exception& e) {
        add(first, e.what());
      }
    }

    const fs::path frames = root / r.paths.frames_dir;
    if (!fs::is_directory(frames)) {
      add(frames, "missing frames directory");
    } else {
      int count = 0;
      for (const auto& entry : fs::directory_iterator(frames))
        if (entry.path().extension() == ".png") ++count;
      if (count != r.dims.frames)
        add(frames, "found " + std::to_string(count) + " frames, expected " + std::to_string(r.dims.frames));
      for (int f = 0; f < r.dims.frames; ++f) {
        const fs::path p = frames / frame_filename(f);
        if (!fs::exists(p)) add(p, "missing frame");
      }
    }

    const fs::path states = root / r.paths.states;
    if (!fs::exists(states)) {
      add(states, "missing states");
    } else {
      const auto text = detail::read_text(states);
      const auto lines = static_cast<int>(std::count(text.begin(), text.end(), '\n'));
      if (lines != r.dims.frames) add(states, "states has " + std::to_string(lines) + " lines, expected " + std::to_string(r.dims.frames));
    }

    const fs::path prompt = root / r.paths.prompt;
    if (!fs::exists(prompt)) {
      add(prompt, "missing prompt");
    } else if (detail::read_text(prompt) != r.prompt.text + "\n") {
      add(prompt, "prompt text differs from manifest");
    }
    if (has_wind_keyword(r.prompt.text) != r.prompt.contains_keywords)
      add(prompt, "contains_keywords flag is inconsistent with the text");

    try {
      const auto control = record_control(r);
      if (r.paths.control_dir) {
        const fs::path p = root / *r.paths.control_dir / "control.fpct";
        try {
          const auto stored = read_fpct(p, r.force.kind, r.dims.fps);
          if (!(stored == control)) add(p, "stored control tensor differs from regenerated tensor");
        } catch (const std::exception& e) {
          add(p, e.what());
        }
      }
    } catch (const std::exception& e) {
      add(root / r.id, std::string("control parameters invalid: ") + e.what());
    }
  }
  return rep;
}

}  // namespace forceforge
