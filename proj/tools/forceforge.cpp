// forceforge command-line entry point.
//
// Exit codes: 0 success, 1 partial failure or failed verdict, 2 invalid
// arguments (usage is printed).

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "forceforge/server.hpp"

using namespace forceforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimsArgs {
  int frames = 49, height = 480, width = 720;
  double fps = 8.0;

  void add(CLI::App* app) {
    app->add_option("--frames", frames, "frames per clip")->capture_default_str();
    app->add_option("--height", height, "frame height in pixels")->capture_default_str();
    app->add_option("--width", width, "frame width in pixels")->capture_default_str();
    app->add_option("--fps", fps, "frames per second")->capture_default_str();
  }
  VideoDims dims() const {
    VideoDims d;
    d.frames = frames;
    d.height = height;
    d.width = width;
    d.fps = fps;
    try {
      d.validate();
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
    return d;
  }
};

const std::map<std::string, bool AblationConfig::*> kAblations{
    {"single-flag", &AblationConfig::single_flag},
    {"single-background", &AblationConfig::single_background},
    {"no-distractors", &AblationConfig::no_distractors},
    {"drop-wind-keywords", &AblationConfig::drop_wind_keywords},
};

AblationConfig parse_ablations(const std::vector<std::string>& names) {
  AblationConfig ab;
  for (const auto& n : names) {
    const auto it = kAblations.find(n);
    if (it == kAblations.end()) throw UsageError("unknown ablation '" + n + "'");
    ab.*(it->second) = true;
  }
  return ab;
}

CLI::Validator ablation_names() {
  std::vector<std::string> names;
  for (const auto& [k, _] : kAblations) names.push_back(k);
  return CLI::IsMember(names);
}

Scenario scenario_arg(const std::string& s) {
  try {
    return parse_scenario(s);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

std::string slurp(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_string(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_bytes(path, text.data(), text.size());
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string scenario = "ball";
  std::size_t count = 10;
  std::uint64_t seed = 0;
  std::string out;
  std::string plan_file, config_file;
  std::vector<std::string> ablations;
  double scale = 1.0;
  bool materialize = false;
  int parallelism = 0;
  bool quiet = false;
  DimsArgs dims;
};

// Resolved configuration persisted next to the manifest. Parallelism and the
// output root are omitted: neither affects the records, and leaving them out
// keeps output trees byte-identical across runs that differ only in them.
ojson run_config(const Plan& plan, double scale, bool materialize) {
  return {{"scenario", to_string(plan.scenario)},
          {"count", plan.entries.size()},
          {"master_seed", plan.master_seed},
          {"dims", to_json(plan.dims)},
          {"scale", scale},
          {"ablation", to_json(plan.ablation)},
          {"materialize_control", materialize},
          {"generator_version", kGeneratorVersion},
          {"catalog_version", kCatalogVersion}};
}

int cmd_generate(GenerateArgs a) {
  Plan plan;
  if (!a.config_file.empty()) {
    const auto cfg = ojson::parse(slurp(a.config_file));
    a.scenario = cfg.at("scenario").get<std::string>();
    a.count = cfg.at("count").get<std::size_t>();
    a.seed = cfg.at("master_seed").get<std::uint64_t>();
    a.scale = cfg.at("scale").get<double>();
    a.materialize = cfg.at("materialize_control").get<bool>();
    plan = dataset_plan(scenario_arg(a.scenario), a.count, a.seed, ablation_from_json(cfg.at("ablation")),
                        dims_from_json(cfg.at("dims")));
  } else if (!a.plan_file.empty()) {
    plan = parse_plan(slurp(a.plan_file));
  } else {
    if (a.count < 1) throw UsageError("--count must be >= 1");
    plan = dataset_plan(scenario_arg(a.scenario), a.count, a.seed, parse_ablations(a.ablations), a.dims.dims());
  }
  if (!(a.scale > 0.0 && a.scale <= 1.0)) throw UsageError("--scale must lie in (0, 1]");

  const fs::path root = a.out;
  fs::create_directories(root);
  write_string(root / "run_config.json", run_config(plan, a.scale, a.materialize).dump(2) + "\n");

  GenerateOptions opt;
  opt.record.scale = a.scale;
  opt.record.materialize_control = a.materialize;
  opt.parallelism = a.parallelism > 0 ? a.parallelism : default_parallelism();
  std::size_t done = 0;
  const std::size_t total = plan.entries.size();
  if (!a.quiet)
    opt.progress = [&](const std::string& id, bool ok) {
      std::fprintf(stderr, "[%zu/%zu] %s %s\n", ++done, total, id.c_str(), ok ? "ok" : "FAILED");
    };
  const auto rep = generate_dataset(plan, root, opt);
  std::printf("wrote %zu of %zu records to %s\n", rep.written.size(), total, root.string().c_str());
  if (rep.failures.empty()) return kExitOk;
  std::fprintf(stderr, "%zu records failed:\n", rep.failures.size());
  for (const auto& [id, msg] : rep.failures) std::fprintf(stderr, "  %s: %s\n", id.c_str(), msg.c_str());
  return kExitFailure;
}

// ---------------------------------------------------------------------------
// plan

struct PlanArgs {
  std::string scenario = "ball";
  std::size_t count = 10;
  std::uint64_t seed = 0;
  std::string out;
  std::vector<std::string> ablations;
  DimsArgs dims;
};

int cmd_plan(const PlanArgs& a) {
  if (a.count < 1) throw UsageError("--count must be >= 1");
  const auto text = serialize_plan(dataset_plan(scenario_arg(a.scenario), a.count, a.seed, parse_ablations(a.ablations),
                                                a.dims.dims()));
  if (a.out.empty()) std::cout << text;
  else write_string(a.out, text);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// encode

struct EncodeArgs {
  std::string type;
  std::vector<double> force, angle, x, y;
  std::string prompt_file;
  std::string out;
  bool png = false;
  double blob_radius = kDefaultBlobRadius;
  DimsArgs dims;
};

int cmd_encode(const EncodeArgs& a) {
  const auto dims = a.dims.dims();
  std::string type = a.type;
  auto force = a.force, angle = a.angle, x = a.x, y = a.y;
  if (!a.prompt_file.empty()) {
    // one force-parameter object per line, manifest schema
    std::istringstream in(slurp(a.prompt_file));
    std::string line;
    std::vector<ForceParams> params;
    while (std::getline(in, line))
      if (!line.empty()) params.push_back(force_from_json(ojson::parse(line)));
    if (params.empty()) throw UsageError("prompt file has no forces");
    type = params.size() > 1 ? "multi" : to_string(params.front().kind);
    for (const auto& p : params) {
      if (params.size() > 1 && p.kind != EncodingKind::local) throw UsageError("multiple forces must all be local");
      force.push_back(p.magnitude);
      angle.push_back(p.angle_deg);
      x.push_back(p.x);
      y.push_back(p.y);
    }
  }
  if (type.empty()) throw UsageError("--type is required");
  if (force.empty() || angle.empty()) throw UsageError("--force and --angle are required");

  const BlobParams blob = BlobParams::from_radius(a.blob_radius);
  std::optional<ControlTensor> t;
  ojson summary{{"type", type}, {"dims", to_json(dims)}};
  if (type == "global") {
    if (force.size() != 1 || angle.size() != 1) throw UsageError("global takes one --force and one --angle");
    t = encode_global(GlobalForcePrompt::create(force[0], angle[0]), dims);
    summary["values"] = {t->at(0, 0, 0, 0), t->at(0, 1, 0, 0), t->at(0, 2, 0, 0)};
  } else if (type == "local" || type == "multi") {
    if (x.empty() || y.empty()) throw UsageError(type + " needs --x and --y");
    const std::size_t n = x.size();
    if (y.size() != n || force.size() != n || angle.size() != n)
      throw UsageError("--x, --y, --force and --angle must be given the same number of times");
    if (type == "local" && n != 1) throw UsageError("local takes a single force; use --type multi");
    std::vector<LocalForcePrompt> forces;
    for (std::size_t i = 0; i < n; ++i) forces.push_back(LocalForcePrompt::create(x[i], y[i], force[i], angle[i], dims));
    t = encode_multi(MultiForcePrompt::create(forces), dims, blob);
    auto [ax, ay] = frame_argmax(*t, dims.frames - 1);
    summary["final_argmax"] = {ax, ay};
  } else {
    throw UsageError("--type must be global, local or multi");
  }

  if (!a.out.empty()) {
    const fs::path dir = a.out;
    fs::create_directories(dir);
    write_fpct(dir / "control.fpct", *t);
    summary["fpct"] = (dir / "control.fpct").string();
    if (a.png) {
      write_control_pngs(dir / "frames", *t);
      summary["frames_dir"] = (dir / "frames").string();
    }
  }
  std::cout << summary.dump() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct MassArgs {
  std::uint64_t seed = 1;
  int repeats = 10;
  double scale = 0.25;
  int parallelism = 0;
  std::string out;
};

int cmd_mass_study(const MassArgs& a) {
  MassStudyConfig cfg;
  cfg.seed = a.seed;
  cfg.repeats = a.repeats;
  cfg.scale = a.scale;
  cfg.parallelism = a.parallelism > 0 ? a.parallelism : default_parallelism();
  if (cfg.repeats < 1) throw UsageError("--repeats must be >= 1");
  if (!(cfg.scale > 0.0 && cfg.scale <= 1.0)) throw UsageError("--scale must lie in (0, 1]");
  const auto r = mass_study(cfg);

  std::printf("%-8s %6s %12s %12s %12s %12s %4s\n", "F", "", "soccer_mean", "soccer_std", "bowling_mean", "bowling_std", "n");
  for (std::size_t i = 0; i < r.soccer.points.size(); ++i) {
    const auto& s = r.soccer.points[i];
    const auto& b = r.bowling.points[i];
    std::printf("%-8.3f %6s %12.3f %12.3f %12.3f %12.3f %4d\n", s.force, "", s.mean, s.stddev, b.mean, b.stddev, s.n);
  }
  std::printf("fit soccer  slope=%.3f intercept=%.3f r2=%.4f\n", r.soccer.fit.slope, r.soccer.fit.intercept, r.soccer.fit.r2);
  std::printf("fit bowling slope=%.3f intercept=%.3f r2=%.4f\n", r.bowling.fit.slope, r.bowling.fit.intercept, r.bowling.fit.r2);
  std::printf("closed-form max relative error %.2e, tracker max error %.3f px\n", r.max_closed_form_rel_error,
              r.max_tracker_error_px);
  const bool pass = r.ordering_ok && r.ordering_per_condition_ok && r.monotone_ok && r.max_closed_form_rel_error < 0.01;
  std::printf("ordering soccer > bowling: %s\n", r.ordering_ok && r.ordering_per_condition_ok ? "PASS" : "FAIL");
  std::printf("strictly increasing in F: %s\n", r.monotone_ok ? "PASS" : "FAIL");

  if (!a.out.empty()) {
    const fs::path dir = a.out;
    fs::create_directories(dir);
    write_string(dir / "mass_study.csv", r.csv());
    std::string cells;
    for (const auto& c : r.cells)
      cells += ojson{{"id", c.id},
                     {"material", to_string(c.material)},
                     {"surface", c.surface},
                     {"color", c.color},
                     {"F", c.force},
                     {"repeat", c.repeat},
                     {"tracked_px", c.tracked_px},
                     {"truth_px", c.truth_px},
                     {"world_m", c.world_m},
                     {"closed_form_m", c.closed_form_m},
                     {"fallback_frames", c.fallback_frames}}
                   .dump() +
               "\n";
    write_string(dir / "mass_study_cells.jsonl", cells);
  }
  return pass ? kExitOk : kExitFailure;
}

struct AuditArgs {
  std::string plan, manifest, out;
  std::vector<std::string> fields;
};

int cmd_audit(const AuditArgs& a) {
  if (a.plan.empty() == a.manifest.empty()) throw UsageError("give exactly one of --plan or --manifest");
  AuditReport rep;
  if (!a.plan.empty()) {
    rep = audit_distributions(parse_plan(slurp(a.plan)), a.fields);
  } else {
    const auto records = load_manifest(a.manifest);
    if (records.empty()) throw InvalidArgument("manifest is empty");
    std::vector<SceneSpec> specs;
    for (const auto& r : records) specs.push_back(r.spec);
    rep = audit_distributions(specs, records.front().ablation, a.fields);
  }
  std::printf("%-18s %-11s %10s %10s %7s %s\n", "field", "test", "statistic", "p", "n", "verdict");
  std::string lines;
  for (const auto& f : rep.fields) {
    std::printf("%-18s %-11s %10.4f %10.4f %7zu %s%s%s\n", f.field.c_str(), f.test.c_str(), f.statistic, f.p_value, f.n,
                f.pass ? "PASS" : "FAIL", f.note.empty() ? "" : "  ", f.note.c_str());
    lines += to_json(f).dump() + "\n";
  }
  if (!a.out.empty()) write_string(a.out, lines);
  return rep.pass() ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// validate, serve

int cmd_validate(const std::string& root) {
  const auto rep = validate_dataset(root);
  for (const auto& f : rep.findings) std::printf("%s\t%s\t%s\n", f.id.c_str(), f.path.c_str(), f.message.c_str());
  std::printf("%zu records checked, %zu findings\n", rep.records_checked, rep.findings.size());
  return rep.ok() ? kExitOk : kExitFailure;
}

int cmd_serve(const std::string& host, int port) {
  httplib::Server server;
  register_routes(server);
  std::fprintf(stderr, "serving on http://%s:%d\n", host.c_str(), port);
  if (!server.listen(host, port)) {
    std::fprintf(stderr, "cannot listen on %s:%d\n", host.c_str(), port);
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forceforge: force-conditioned synthetic video dataset engine"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "plan, simulate, render and write a dataset");
  g->add_option("--scenario", gen.scenario, "flag, ball or plant")->capture_default_str();
  g->add_option("--count", gen.count, "number of records")->capture_default_str();
  g->add_option("--seed", gen.seed, "master seed")->capture_default_str();
  g->add_option("--out", gen.out, "output root")->required();
  g->add_option("--plan", gen.plan_file, "generate from a plan file instead of sampling");
  g->add_option("--config", gen.config_file, "regenerate from a persisted run_config.json");
  g->add_option("--ablation", gen.ablations, "dataset ablation (repeatable)")->check(ablation_names());
  g->add_option("--scale", gen.scale, "spatial render scale")->capture_default_str();
  g->add_flag("--materialize-control", gen.materialize, "also write control.fpct per record");
  g->add_option("--parallelism", gen.parallelism, "worker threads (default FORCEFORGE_THREADS or core count)");
  g->add_flag("--quiet", gen.quiet, "no per-record progress");
  gen.dims.add(g);

  PlanArgs plan;
  auto* p = app.add_subcommand("plan", "write a dataset plan without rendering");
  p->add_option("--scenario", plan.scenario, "flag, ball or plant")->capture_default_str();
  p->add_option("--count", plan.count, "number of records")->capture_default_str();
  p->add_option("--seed", plan.seed, "master seed")->capture_default_str();
  p->add_option("--out", plan.out, "plan file (default stdout)");
  p->add_option("--ablation", plan.ablations, "dataset ablation (repeatable)")->check(ablation_names());
  plan.dims.add(p);

  EncodeArgs enc;
  auto* e = app.add_subcommand("encode", "encode a force prompt into a control tensor");
  e->add_option("--type", enc.type, "global, local or multi")->check(CLI::IsMember({"global", "local", "multi"}));
  e->add_option("--force", enc.force, "force magnitude in [0,1] (repeat for multi)");
  e->add_option("--angle", enc.angle, "screen angle in degrees, 90 = up (repeat for multi)");
  e->add_option("--x", enc.x, "pixel column (local/multi)");
  e->add_option("--y", enc.y, "pixel row (local/multi)");
  e->add_option("--prompt-file", enc.prompt_file, "force parameters, one JSON object per line");
  e->add_option("--out", enc.out, "directory for control.fpct");
  e->add_flag("--png", enc.png, "also write frames/frame_%04d.png");
  e->add_option("--blob-radius", enc.blob_radius, "blob radius in pixels")->capture_default_str();
  enc.dims.add(e);

  auto* ev = app.add_subcommand("eval", "run evaluation studies");
  ev->require_subcommand(1);
  MassArgs mass;
  auto* ms = ev->add_subcommand("mass-study", "force-distance curves for soccer vs bowling balls");
  ms->add_option("--seed", mass.seed)->capture_default_str();
  ms->add_option("--repeats", mass.repeats)->capture_default_str();
  ms->add_option("--scale", mass.scale)->capture_default_str();
  ms->add_option("--parallelism", mass.parallelism);
  ms->add_option("--out", mass.out, "directory for mass_study.csv and per-cell records");
  AuditArgs audit;
  auto* au = ev->add_subcommand("audit", "goodness-of-fit audit of sampled scene distributions");
  au->add_option("--plan", audit.plan, "plan file");
  au->add_option("--manifest", audit.manifest, "dataset root");
  au->add_option("--fields", audit.fields, "fields to audit (default all)")->delimiter(',');
  au->add_option("--out", audit.out, "report file, one JSON record per field");

  std::string root;
  auto* v = app.add_subcommand("validate", "check a dataset on disk against its manifest");
  v->add_option("--root", root, "dataset root")->required();

  std::string host = "127.0.0.1";
  int port = 8080;
  auto* s = app.add_subcommand("serve", "HTTP backend for the prompt authoring UI");
  s->add_option("--host", host)->capture_default_str();
  s->add_option("--port", port)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& err) {
    std::cerr << "error: " << err.what() << "\n\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    if (!sub->get_subcommands().empty()) sub = sub->get_subcommands().front();
    std::cerr << sub->help();
    return kExitUsage;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  try {
    if (chosen == g) return cmd_generate(gen);
    if (chosen == p) return cmd_plan(plan);
    if (chosen == e) return cmd_encode(enc);
    if (chosen == ev) return ms->parsed() ? cmd_mass_study(mass) : cmd_audit(audit);
    if (chosen == v) return cmd_validate(root);
    if (chosen == s) return cmd_serve(host, port);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n\n";
    const CLI::App* sub = chosen;
    if (chosen == ev) sub = ms->parsed() ? ms : au;
    std::cerr << sub->help();
    return kExitUsage;
  } catch (const InvalidArgument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
