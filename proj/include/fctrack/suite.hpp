#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "fctrack/pipeline.hpp"
#include "fctrack/presets.hpp"
#include "fctrack/sweep.hpp"

// Scenario-level checks of the correction layer against the correction-disabled tracker.
// The report text holds no timings, so equal inputs give byte-identical reports.

namespace fctrack {

struct SuiteOptions {
  std::uint64_t seed = 20261015;
  int crossing_scenarios = 100;
  int open_scenarios = 50;
  CrossingPreset preset;
  TrackerConfig base;  // correction thresholds taken from here
  EvalOptions eval;
  double min_mean_reduction = 0.10;  // relative
  double max_idf1_drop = 0.002;
  std::vector<double> grid_tau_min{0.6, 0.7, 0.8, 0.9};
  std::vector<double> grid_tau_dif{0.2, 0.3, 0.4, 0.5};
  int grid_required = 12;
  unsigned threads = 1;
};

struct CheckResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::vector<std::string> details;
};

struct SuiteReport {
  std::vector<CheckResult> checks;
  std::string text;

  bool all_pass() const {
    for (const auto& c : checks) {
      if (!c.pass) return false;
    }
    return true;
  }
  const CheckResult* find(int id) const {
    for (const auto& c : checks) {
      if (c.id == id) return &c;
    }
    return nullptr;
  }
};

namespace detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline TrackerConfig with_stages(TrackerConfig cfg, bool s1, bool s2) {
  cfg.correction.stage1 = s1;
  cfg.correction.stage2 = s2;
  return cfg;
}

inline std::string describe(const EvalReport& r) {
  return "idf1=" + fmt("%.6f", r.idf1) + " mota=" + fmt("%.6f", r.mota) +
         " switches=" + std::to_string(r.switches.count) + " mean=" + fmt("%.4f", r.switches.mean) +
         " median=" + fmt("%.4f", r.switches.median) + " long_ratio=" + fmt("%.4f", r.switches.long_ratio);
}

inline int identical_results(const SuiteRun& a, const SuiteRun& b) {
  int same = 0;
  for (std::size_t i = 0; i < a.runs.size(); ++i) same += a.runs[i].results == b.runs[i].results;
  return same;
}

struct DirectionCheck {
  bool mean_ok = false;
  bool long_ok = false;
  bool idf1_ok = false;
  double mean_change = 0.0;
};

inline DirectionCheck direction(const EvalReport& base, const EvalReport& corr, const SuiteOptions& o) {
  DirectionCheck d;
  const auto& b = base.switches;
  const auto& c = corr.switches;
  if (!b.empty && b.mean > 0.0) {
    d.mean_change = (c.mean - b.mean) / b.mean;
    d.mean_ok = !c.empty ? d.mean_change <= -o.min_mean_reduction : true;
  }
  d.long_ok = !b.empty && (c.empty ? b.long_ratio > 0.0 : c.long_ratio < b.long_ratio);
  d.idf1_ok = corr.idf1 >= base.idf1 - o.max_idf1_drop;
  return d;
}

}  // namespace detail

inline std::vector<SequenceInput> crossing_suite(const SuiteOptions& o) {
  std::vector<SequenceInput> seqs(static_cast<std::size_t>(o.crossing_scenarios));
  parallel_for(seqs.size(), o.threads, [&](std::size_t i) {
    seqs[i] = to_sequence_input(generate(make_crossing_scenario(o.seed, static_cast<int>(i), o.preset)));
  });
  return seqs;
}

inline std::vector<SequenceInput> open_suite(const SuiteOptions& o) {
  std::vector<SequenceInput> seqs(static_cast<std::size_t>(o.open_scenarios));
  parallel_for(seqs.size(), o.threads, [&](std::size_t i) {
    seqs[i] = to_sequence_input(generate(make_open_scenario(o.seed, static_cast<int>(i), o.preset)));
  });
  return seqs;
}

/// Raises every detection confidence to at least `floor`.
inline std::vector<SequenceInput> with_confidence_floor(std::vector<SequenceInput> seqs, double floor) {
  for (auto& s : seqs) {
    for (auto& [frame, dets] : s.detections) {
      for (auto& d : dets) d.confidence = std::max(d.confidence, floor);
    }
  }
  return seqs;
}

inline SuiteReport run_suite(const SuiteOptions& o) {
  if (o.crossing_scenarios < 1 || o.open_scenarios < 1) throw InputError("suite sizes must be >= 1");
  SuiteReport rep;
  const TrackerConfig corrected = detail::with_stages(o.base, true, true);
  const TrackerConfig baseline = detail::with_stages(o.base, false, false);

  {
    const auto open = open_suite(o);
    const auto on = run_many(open, corrected, o.eval, o.threads);
    const auto off = run_many(open, baseline, o.eval, o.threads);
    const int same = detail::identical_results(on, off);
    int reassigned = 0;
    for (const auto& r : on.runs) reassigned += r.stats.reassignments_stage1 + r.stats.reassignments_stage2;
    CheckResult c{4, "correction is a no-op without overlap", same == o.open_scenarios, {}};
    c.details.push_back("identical_result_files=" + std::to_string(same) + "/" + std::to_string(o.open_scenarios));
    c.details.push_back("reassignments=" + std::to_string(reassigned));
    rep.checks.push_back(std::move(c));
  }

  const auto crossing = crossing_suite(o);
  const auto base_run = run_many(crossing, baseline, o.eval, o.threads);
  const auto& base_report = base_run.pooled.report;

  auto direction_check = [&](int id, const std::string& title, std::vector<Similarity> modes) {
    CheckResult c{id, title, true, {}};
    c.details.push_back("baseline " + detail::describe(base_report));
    for (Similarity s : modes) {
      TrackerConfig cfg = corrected;
      cfg.correction.similarity = s;
      const auto run = run_many(crossing, cfg, o.eval, o.threads);
      const auto& r = run.pooled.report;
      const auto d = detail::direction(base_report, r, o);
      const bool ok = id == 7 ? d.mean_ok : d.mean_ok && d.long_ok && d.idf1_ok;
      c.pass = c.pass && ok;
      c.details.push_back(std::string(to_string(s)) + " " + detail::describe(r));
      c.details.push_back(std::string(to_string(s)) + " mean_change=" + detail::fmt("%+.4f", d.mean_change) +
                          " mean_ok=" + (d.mean_ok ? "yes" : "no") + " long_ok=" + (d.long_ok ? "yes" : "no") +
                          " idf1_ok=" + (d.idf1_ok ? "yes" : "no"));
    }
    rep.checks.push_back(std::move(c));
  };
  direction_check(5, "corrected tracker shortens identity switches", {o.base.correction.similarity});
  direction_check(7, "both similarity modes shorten identity switches", {Similarity::cosine, Similarity::euclidean});

  {
    const auto forced = with_confidence_floor(crossing, o.base.conf_split);
    const auto none = run_many(forced, baseline, o.eval, o.threads);
    const auto s2 = run_many(forced, detail::with_stages(o.base, false, true), o.eval, o.threads);
    const auto s1 = run_many(forced, detail::with_stages(o.base, true, false), o.eval, o.threads);
    const auto both = run_many(forced, corrected, o.eval, o.threads);
    const int n = o.crossing_scenarios;
    const int s2_same = detail::identical_results(s2, none);
    const int s1_same = detail::identical_results(s1, both);
    int reassigned = 0;
    for (const auto& r : both.runs) reassigned += r.stats.reassignments_stage1;
    CheckResult c{6, "stage ablation with every detection in the first stage", s2_same == n && s1_same == n, {}};
    c.details.push_back("stage2_only_equals_baseline=" + std::to_string(s2_same) + "/" + std::to_string(n));
    c.details.push_back("stage1_only_equals_both=" + std::to_string(s1_same) + "/" + std::to_string(n));
    c.details.push_back("stage1_reassignments=" + std::to_string(reassigned));
    rep.checks.push_back(std::move(c));
  }

  {
    SweepGrid grid;
    grid.tau_min = o.grid_tau_min;
    grid.tau_dif = o.grid_tau_dif;
    TrackerConfig cfg = corrected;
    const auto rows = sweep(grid, crossing, cfg, o.eval, o.threads);
    int good = 0;
    int cells = 0;
    CheckResult c{8, "threshold robustness of IDF1", false, {}};
    c.details.push_back("baseline idf1=" + detail::fmt("%.6f", base_report.idf1));
    for (const auto& r : rows) {
      if (r.sequence != "ALL") continue;
      ++cells;
      const bool ok = r.report.idf1 >= base_report.idf1;
      good += ok;
      c.details.push_back("tau_min=" + detail::fmt("%.2f", r.cell.thresholds.tau_min) +
                          " tau_dif=" + detail::fmt("%.2f", r.cell.thresholds.tau_dif) +
                          " idf1=" + detail::fmt("%.6f", r.report.idf1) + (ok ? " ok" : " below"));
    }
    c.pass = good >= o.grid_required;
    c.details.push_back("cells_at_or_above_baseline=" + std::to_string(good) + "/" + std::to_string(cells) +
                        " required=" + std::to_string(o.grid_required));
    rep.checks.push_back(std::move(c));
  }

  std::sort(rep.checks.begin(), rep.checks.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::ostringstream os;
  os << "suite seed=" << o.seed << " crossing=" << o.crossing_scenarios << " open=" << o.open_scenarios
     << '\n';
  os << "thresholds tau_update=" << detail::fmt("%.4f", o.base.correction.thresholds.tau_update)
     << " tau_overlap=" << detail::fmt("%.4f", o.base.correction.thresholds.tau_overlap)
     << " tau_min=" << detail::fmt("%.4f", o.base.correction.thresholds.tau_min)
     << " tau_dif=" << detail::fmt("%.4f", o.base.correction.thresholds.tau_dif) << '\n';
  for (const auto& c : rep.checks) {
    os << '[' << c.id << "] " << (c.pass ? "PASS" : "FAIL") << ' ' << c.title << '\n';
    for (const auto& d : c.details) os << "    " << d << '\n';
  }
  os << "overall=" << (rep.all_pass() ? "PASS" : "FAIL") << '\n';
  rep.text = os.str();
  return rep;
}

}  // namespace fctrack
