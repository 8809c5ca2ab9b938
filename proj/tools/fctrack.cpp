#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fctrack/fctrack.hpp"

namespace fs = std::filesystem;
using namespace fctrack;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kSuiteFailed = 2;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

TrackerConfig build_config(const std::string& path, const std::vector<std::string>& overrides) {
  TrackerConfig cfg = path.empty() ? TrackerConfig{} : load_config(path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + kv + "'");
    apply_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const auto& w : validate_config(cfg)) std::cerr << "warning: " << w << '\n';
  return cfg;
}

ScenarioSpec preset_spec(const std::string& preset, std::uint64_t seed, int index) {
  if (preset == "crossing") return make_crossing_scenario(seed, index);
  if (preset == "open") return make_open_scenario(seed, index);
  throw InputError("unknown preset '" + preset + "' (expected crossing or open)");
}

struct GenArgs {
  std::string scenario;
  std::string preset = "crossing";
  std::uint64_t seed = 20261015;
  int index = 0;
  int count = 1;
  std::string out;
  bool binary = false;
  bool write_spec = false;
};

int cmd_gen(const GenArgs& a) {
  std::vector<ScenarioSpec> specs;
  if (!a.scenario.empty()) {
    specs.push_back(load_scenario(a.scenario));
  } else {
    if (a.count < 1) throw InputError("--count must be >= 1");
    for (int i = 0; i < a.count; ++i) specs.push_back(preset_spec(a.preset, a.seed, a.index + i));
  }
  for (const auto& spec : specs) {
    const fs::path dir = specs.size() == 1 ? fs::path(a.out) : fs::path(a.out) / spec.name;
    const auto bundle = generate(spec);
    write_bundle(dir, bundle, a.binary);
    if (a.write_spec) write_text((dir / "scenario.json").string(), scenario_to_json(spec).dump(2) + "\n");
    std::cerr << "wrote " << dir.string() << " (" << bundle.gt.tracks().size() << " agents, "
              << bundle.meta.n_frames << " frames)\n";
  }
  return kOk;
}

struct TrackArgs {
  std::string det;
  std::string emb;
  std::string config;
  std::vector<std::string> set;
  std::string out;
  std::string log;
  int first = 1;
  int last = 0;
};

int cmd_track(const TrackArgs& a) {
  const auto cfg = build_config(a.config, a.set);
  const auto dets = read_detections(a.det, a.emb);
  auto res = run_pipeline(dets, cfg, a.first, a.last);
  write_text(a.out, format_results(res.outputs));
  if (!a.log.empty()) write_text(a.log, format_run_log(res.stats, cfg) + format_config(cfg));
  return kOk;
}

struct EvalArgs {
  std::string gt;
  std::string results;
  std::string report;
  std::string events;
  double iou = 0.5;
  int tau_long = 10;
  double min_visibility = 0.0;
};

int cmd_eval(const EvalArgs& a) {
  const auto gt = read_gt(a.gt, a.min_visibility);
  const auto pred = read_results(a.results);
  const auto ev = evaluate(gt, pred, EvalOptions{a.iou, a.tau_long});
  write_text(a.report, format_report(ev.report));
  if (!a.events.empty()) write_text(a.events, format_events_csv(ev.events));
  return kOk;
}

struct SweepArgs {
  std::string grid;
  std::vector<std::string> bundles;
  std::string preset = "crossing";
  std::uint64_t seed = 20261015;
  int count = 10;
  std::string config;
  std::vector<std::string> set;
  std::string out;
  int tau_long = 10;
};

int cmd_sweep(const SweepArgs& a) {
  std::ifstream gin(a.grid);
  if (!gin) throw InputError("cannot open grid " + a.grid);
  std::string text((std::istreambuf_iterator<char>(gin)), std::istreambuf_iterator<char>());
  const auto grid = parse_grid(text);
  const auto cfg = build_config(a.config, a.set);
  std::vector<SequenceInput> seqs;
  if (!a.bundles.empty()) {
    for (const auto& b : a.bundles) seqs.push_back(read_sequence_dir(b));
  } else {
    if (a.count < 1) throw InputError("--count must be >= 1");
    for (int i = 0; i < a.count; ++i) seqs.push_back(to_sequence_input(generate(preset_spec(a.preset, a.seed, i))));
  }
  EvalOptions opt;
  opt.tau_long = a.tau_long;
  const auto rows = sweep(grid, seqs, cfg, opt, worker_threads());
  write_text(a.out, format_sweep_csv(rows));
  return kOk;
}

struct SuiteArgs {
  std::uint64_t seed = 20261015;
  int crossing = 100;
  int open = 50;
  std::string config;
  std::vector<std::string> set;
  std::string report;
};

int cmd_suite(const SuiteArgs& a) {
  SuiteOptions o;
  o.seed = a.seed;
  o.crossing_scenarios = a.crossing;
  o.open_scenarios = a.open;
  o.base = build_config(a.config, a.set);
  o.threads = worker_threads();
  const auto rep = run_suite(o);
  write_text(a.report, rep.text);
  if (!a.report.empty() && a.report != "-") std::fputs(rep.text.c_str(), stdout);
  return rep.all_pass() ? kOk : kSuiteFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online multi-object tracker with overlap-aware identity correction"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate synthetic sequences (gt, detections, embeddings)");
  g->add_option("--scenario", gen.scenario, "Scenario JSON file");
  g->add_option("--preset", gen.preset, "Preset family when no scenario file: crossing or open");
  g->add_option("--seed", gen.seed, "Preset seed");
  g->add_option("--index", gen.index, "First preset index");
  g->add_option("--count", gen.count, "Number of preset sequences (one subdirectory each when > 1)");
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_flag("--binary-embeddings", gen.binary, "Write emb.bin instead of emb.csv");
  g->add_flag("--write-spec", gen.write_spec, "Also write scenario.json next to the bundle");

  TrackArgs track;
  auto* t = app.add_subcommand("track", "Track one sequence");
  t->add_option("--det", track.det, "Detection file")->required();
  t->add_option("--emb", track.emb, "Embedding sidecar (csv or binary)")->required();
  t->add_option("--config", track.config, "Config file (key=value)");
  t->add_option("--set", track.set, "Config override key=value (repeatable)");
  t->add_option("--out", track.out, "Result file (default: stdout)");
  t->add_option("--log", track.log, "Run log file");
  t->add_option("--first-frame", track.first, "First frame to process");
  t->add_option("--last-frame", track.last, "Last frame to process (default: last detection frame)");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score results against ground truth");
  e->add_option("--gt", ev.gt, "Ground-truth file")->required();
  e->add_option("--results", ev.results, "Result file")->required();
  e->add_option("--report", ev.report, "Report file (default: stdout)");
  e->add_option("--events", ev.events, "Switch-event CSV");
  e->add_option("--iou", ev.iou, "Match threshold");
  e->add_option("--tau-long", ev.tau_long, "Switches longer than this many frames count as long");
  e->add_option("--min-visibility", ev.min_visibility, "Ignore GT boxes below this visibility");

  SweepArgs sw;
  auto* s = app.add_subcommand("sweep", "Evaluate a grid of correction settings");
  s->add_option("--grid", sw.grid, "Grid file")->required();
  s->add_option("--bundle", sw.bundles, "Sequence directory (repeatable)");
  s->add_option("--preset", sw.preset, "Preset family when no bundles are given");
  s->add_option("--seed", sw.seed, "Preset seed");
  s->add_option("--count", sw.count, "Number of preset sequences");
  s->add_option("--config", sw.config, "Base config file");
  s->add_option("--set", sw.set, "Config override key=value (repeatable)");
  s->add_option("--out", sw.out, "CSV file (default: stdout)");
  s->add_option("--tau-long", sw.tau_long, "Long-switch threshold in frames");

  SuiteArgs su;
  auto* u = app.add_subcommand("suite", "Run the seeded scenario suite; exit 2 when a check fails");
  u->add_option("--seed", su.seed, "Suite seed");
  u->add_option("--crossing", su.crossing, "Number of crossing scenarios");
  u->add_option("--open", su.open, "Number of overlap-free scenarios");
  u->add_option("--config", su.config, "Base config file");
  u->add_option("--set", su.set, "Config override key=value (repeatable)");
  u->add_option("--report", su.report, "Report file (also printed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*t) return cmd_track(track);
    if (*e) return cmd_eval(ev);
    if (*s) return cmd_sweep(sw);
    if (*u) return cmd_suite(su);
  } catch (const InputError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kInputError;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kInputError;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
