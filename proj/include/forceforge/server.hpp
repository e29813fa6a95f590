#pragma once

// HTTP backend for the interactive prompt authoring UI. Handlers are pure
// functions of the request body; the scene catalog is immutable.
//
//   GET  /healthz    -> "ok"
//   GET  /scenes     -> canned scene list
//   POST /encode     -> control-signal preview strip
//   POST /simulate   -> rendered preview strip + target trajectory

#include <string>
#include <vector>

#include "forceforge/evaluation.hpp"

// Must follow Eigen: <resolv.h>, pulled in by httplib, defines _res, which
// Eigen uses as a parameter name.
#include <httplib.h>

namespace forceforge {

struct ApiResponse {
  int status = 200;
  ojson body;
};

struct CannedScene {
  std::string id;
  Scenario scenario;
  std::string description;
  std::uint64_t seed = 0;
  BallMaterial material = BallMaterial::soccer;
};

inline const std::vector<CannedScene>& canned_scenes() {
  static const std::vector<CannedScene> scenes{
      {"ball-soccer", Scenario::ball, "single soccer ball on a checker ground, side view", 0, BallMaterial::soccer},
      {"ball-bowling", Scenario::ball, "single bowling ball on a checker ground, side view", 0, BallMaterial::bowling},
      {"flag", Scenario::flag, "flags on poles", 3, BallMaterial::soccer},
      {"plant", Scenario::plant, "potted flower", 5, BallMaterial::soccer},
  };
  return scenes;
}

inline constexpr double kPreviewScale = 0.25;
inline constexpr int kPreviewTiles = 7;

namespace detail {

struct BadRequest : Error {
  using Error::Error;
};

inline std::string base64(const std::vector<std::uint8_t>& bytes) {
  return httplib::detail::base64_encode(std::string(bytes.begin(), bytes.end()));
}

inline std::vector<int> tile_frames(int frames, int tiles) {
  tiles = std::clamp(tiles, 1, frames);
  std::vector<int> out;
  for (int i = 0; i < tiles; ++i)
    out.push_back(tiles == 1 ? frames - 1 : static_cast<int>(std::lround(static_cast<double>(i) * (frames - 1) / (tiles - 1))));
  return out;
}

template <class T>
T field(const ojson& body, const char* name, T fallback) {
  if (!body.contains(name)) return fallback;
  try {
    return body.at(name).get<T>();
  } catch (const ojson::exception&) {
    throw BadRequest(std::string("field '") + name + "' has the wrong type");
  }
}

template <class T>
T required(const ojson& body, const char* name) {
  if (!body.contains(name)) throw BadRequest(std::string("missing field '") + name + "'");
  return field<T>(body, name, T{});
}

inline VideoDims request_dims(const ojson& body) {
  VideoDims d;
  if (body.contains("dims")) {
    try {
      d = dims_from_json(body.at("dims"));
    } catch (const std::exception& e) {
      throw BadRequest(std::string("invalid dims: ") + e.what());
    }
  }
  try {
    d.validate();
  } catch (const InvalidArgument& e) {
    throw BadRequest(e.what());
  }
  return d;
}

inline double request_scale(const ojson& body) {
  const double s = field<double>(body, "scale", kPreviewScale);
  if (!(s > 0.0 && s <= 1.0)) throw BadRequest("scale must lie in (0, 1]");
  return s;
}

template <class Fn>
ApiResponse guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const OutOfFrame& e) {
    return {422, {{"error", e.what()}}};
  } catch (const InvalidArgument& e) {
    return {400, {{"error", e.what()}}};
  } catch (const BadRequest& e) {
    return {400, {{"error", e.what()}}};
  } catch (const ojson::exception& e) {
    return {400, {{"error", e.what()}}};
  } catch (const std::exception& e) {
    return {500, {{"error", e.what()}}};
  }
}

inline LocalForcePrompt local_from_json(const ojson& f, const VideoDims& dims) {
  return LocalForcePrompt::create(required<double>(f, "x"), required<double>(f, "y"), required<double>(f, "force"),
                                  required<double>(f, "angle"), dims);
}

}  // namespace detail

inline ApiResponse handle_scenes() {
  ojson list = ojson::array();
  for (const auto& s : canned_scenes())
    list.push_back({{"id", s.id}, {"scenario", to_string(s.scenario)}, {"description", s.description}});
  return {200, {{"scenes", list}}};
}

// Body: {"type": "global"|"local"|"multi", "force", "angle", "x", "y",
// "forces": [{x, y, force, angle}], "dims"?, "scale"?, "tiles"?}. Field names
// follow the manifest force schema.
// Coordinates are in full-resolution pixels; the strip is rendered at `scale`.
inline ApiResponse handle_encode(const ojson& body) {
  return detail::guarded([&]() -> ApiResponse {
    const auto dims = detail::request_dims(body);
    const double scale = detail::request_scale(body);
    const auto preview = dims.scaled(scale);
    const auto type = detail::required<std::string>(body, "type");
    const auto frames = detail::tile_frames(dims.frames, detail::field<int>(body, "tiles", kPreviewTiles));
    const auto blob_full = BlobParams{};
    const auto blob_preview = BlobParams::from_radius(blob_full.radius * preview.width / dims.width);

    ControlTensor full(dims, EncodingKind::global), small(preview, EncodingKind::global);
    if (type == "global") {
      const auto p = GlobalForcePrompt::create(detail::required<double>(body, "force"),
                                               detail::required<double>(body, "angle"));
      full = encode_global(p, dims);
      small = encode_global(p, preview);
    } else if (type == "local" || type == "multi") {
      std::vector<LocalForcePrompt> forces;
      if (type == "local") {
        forces.push_back(detail::local_from_json(body, dims));
      } else {
        if (!body.contains("forces") || !body.at("forces").is_array()) throw detail::BadRequest("multi needs 'forces'");
        for (const auto& f : body.at("forces")) forces.push_back(detail::local_from_json(f, dims));
      }
      std::vector<LocalForcePrompt> scaled;
      for (const auto& f : forces) scaled.push_back(f.rescaled(dims, preview));
      full = encode_multi(MultiForcePrompt::create(forces), dims, blob_full);
      small = encode_multi(MultiForcePrompt::create(scaled), preview, blob_preview);
    } else {
      throw detail::BadRequest("type must be global, local or multi");
    }

    std::vector<Image> tiles;
    ojson argmax = ojson::array();
    for (int f : frames) {
      tiles.push_back(control_frame_image(small, f));
      if (full.kind() == EncodingKind::local) {
        auto [x, y] = frame_argmax(full, f);
        argmax.push_back({x, y});
      }
    }
    ojson out{{"type", type},
              {"frames", frames},
              {"dims", to_json(dims)},
              {"preview_dims", to_json(preview)},
              {"strip_png", detail::base64(encode_png(hconcat(tiles)))}};
    if (full.kind() == EncodingKind::local) out["argmax"] = argmax;
    else out["channels"] = {full.at(0, 0, 0, 0), full.at(0, 1, 0, 0), full.at(0, 2, 0, 0)};
    return {200, out};
  });
}

// Body: {"scene": id, "force", "angle", "seed"?, "dims"?, "scale"?,
// "tiles"?}. For balls and plants the angle is a world direction (ball: in the
// ground plane from +x toward +y; plant: in the sway plane from +x toward up);
// for flags it is the wind direction. The trajectory is the projected
// ground-truth path of the target (ball center, plant tip, first flag's
// free-edge midpoint) in full-resolution pixels.
inline ApiResponse handle_simulate(const ojson& body) {
  return detail::guarded([&]() -> ApiResponse {
    const auto dims = detail::request_dims(body);
    const auto preview = dims.scaled(detail::request_scale(body));
    const auto id = detail::required<std::string>(body, "scene");
    const double magnitude = detail::required<double>(body, "force");
    const double angle = normalize_degrees(detail::required<double>(body, "angle"));
    detail::checked_magnitude(magnitude);
    const auto seed = detail::field<std::uint64_t>(body, "seed", 0);
    const auto frames = detail::tile_frames(dims.frames, detail::field<int>(body, "tiles", kPreviewTiles));

    const auto it = std::find_if(canned_scenes().begin(), canned_scenes().end(), [&](const auto& s) { return s.id == id; });
    if (it == canned_scenes().end()) return {404, {{"error", "unknown scene '" + id + "'"}}};

    SceneGeometry geo;
    std::vector<SceneState> states;
    CameraModel cam;
    std::vector<Vec3> path;
    if (it->scenario == Scenario::ball) {
      cam = mass_study_camera(dims);
      geo.ground_texture = 0;
      geo.ball_colors = {0};
      const auto sim = simulate_ball({make_ball(it->material, -1.5, 0.0)}, 0, {magnitude, angle}, SimClock::for_dims(dims));
      for (const auto& s : sim) {
        states.emplace_back(s);
        path.push_back(s[0].position);
      }
    } else {
      SceneSpec spec;
      if (it->scenario == Scenario::flag) {
        auto f = sample_flag_scene(it->seed);
        f.wind_speed = magnitude;
        f.wind_direction_deg = angle;
        f.gust_seed = seed;
        spec = f;
      } else {
        auto p = sample_plant_scene(it->seed);
        p.force_magnitude = magnitude;
        p.force_angle_deg = angle;
        spec = p;
      }
      auto sim = simulate_scene(spec, dims);
      geo = sim.geometry;
      states = std::move(sim.states);
      cam = camera_of(spec).model(dims);
      for (const auto& s : states) {
        if (const auto* chain = std::get_if<ChainState>(&s)) {
          path.push_back(chain->node_positions().back());
        } else {
          const auto& cloth = std::get<std::vector<ClothState>>(s).front();
          Vec3 sum{};
          for (int r = 0; r < cloth.rows; ++r) sum = sum + cloth.vertex(r, cloth.cols - 1).position;
          path.push_back(sum / static_cast<double>(cloth.rows));
        }
      }
    }

    const auto small_cam = cam.with_dims(preview);
    std::vector<Image> tiles;
    const BackgroundCache background(geo, small_cam);
    for (int f : frames) tiles.push_back(render_frame(geo, states[static_cast<std::size_t>(f)], small_cam, {}, &background));

    ojson traj = ojson::array();
    std::optional<std::pair<double, double>> first, last;
    for (std::size_t f = 0; f < path.size(); ++f) {
      try {
        auto [u, v] = project_point(cam, path[f]);
        traj.push_back({{"frame", f}, {"u", u}, {"v", v}, {"source", to_string(TrackSource::ground_truth)},
                        {"off_screen", !in_frame(cam, u, v)}});
        if (!first) first = std::make_pair(u, v);
        last = std::make_pair(u, v);
      } catch (const BehindCamera&) {
      }
    }
    ojson out{{"scene", id},
              {"frames", frames},
              {"dims", to_json(dims)},
              {"preview_dims", to_json(preview)},
              {"strip_png", detail::base64(encode_png(hconcat(tiles)))},
              {"trajectory", traj},
              {"distance_px", first ? std::hypot(last->first - first->first, last->second - first->second) : 0.0}};
    return {200, out};
  });
}

inline void register_routes(httplib::Server& server) {
  auto reply = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto parse = [](const httplib::Request& req) -> std::optional<ojson> {
    try {
      auto j = ojson::parse(req.body);
      if (j.is_object()) return j;
    } catch (const ojson::exception&) {
    }
    return std::nullopt;
  };
  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });
  server.Get("/scenes", [reply](const httplib::Request&, httplib::Response& res) { reply(res, handle_scenes()); });
  server.Post("/encode", [reply, parse](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse(req);
    reply(res, body ? handle_encode(*body) : ApiResponse{400, {{"error", "body must be a JSON object"}}});
  });
  server.Post("/simulate", [reply, parse](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse(req);
    reply(res, body ? handle_simulate(*body) : ApiResponse{400, {{"error", "body must be a JSON object"}}});
  });
}

}  // namespace forceforge
