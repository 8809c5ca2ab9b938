#pragma once

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "fctrack/config.hpp"
#include "fctrack/pipeline.hpp"

namespace fctrack {

/// Cartesian grid over the correction settings. Text form: one `key=v1,v2,...` line per
/// axis, keys tau_update, tau_overlap, tau_min, tau_dif, similarity, stages (stages values
/// are two-letter flags for stage 1/2: "11", "10", "01", "00"). Missing axes keep the
/// base configuration's value.
struct SweepGrid {
  std::vector<double> tau_update;
  std::vector<double> tau_overlap;
  std::vector<double> tau_min;
  std::vector<double> tau_dif;
  std::vector<Similarity> similarity;
  std::vector<std::pair<bool, bool>> stages;

  std::vector<CorrectionConfig> cells(const CorrectionConfig& base) const {
    auto or_base = [](auto v, auto b) {
      using T = typename decltype(v)::value_type;
      return v.empty() ? std::vector<T>{b} : v;
    };
    const auto& th = base.thresholds;
    std::vector<CorrectionConfig> out;
    for (double tu : or_base(tau_update, th.tau_update))
      for (double to : or_base(tau_overlap, th.tau_overlap))
        for (double tm : or_base(tau_min, th.tau_min))
          for (double td : or_base(tau_dif, th.tau_dif))
            for (Similarity s : or_base(similarity, base.similarity))
              for (auto st : or_base(stages, std::make_pair(base.stage1, base.stage2))) {
                CorrectionConfig c;
                c.thresholds = CorrectionThresholds{tu, to, tm, td};
                c.similarity = s;
                c.stage1 = st.first;
                c.stage2 = st.second;
                out.push_back(c);
              }
    return out;
  }
};

inline SweepGrid parse_grid(std::string_view text) {
  SweepGrid g;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = line;
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = config_detail::trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw InputError("grid line " + std::to_string(line_no) + ": expected key=v1,v2,...");
    }
    const auto key = config_detail::trim(s.substr(0, eq));
    std::vector<std::string_view> vals;
    for (auto v : io::split(s.substr(eq + 1))) vals.push_back(v);
    for (auto v : vals) {
      if (key == "tau_update") g.tau_update.push_back(config_detail::parse_number(key, v));
      else if (key == "tau_overlap") g.tau_overlap.push_back(config_detail::parse_number(key, v));
      else if (key == "tau_min") g.tau_min.push_back(config_detail::parse_number(key, v));
      else if (key == "tau_dif") g.tau_dif.push_back(config_detail::parse_number(key, v));
      else if (key == "similarity") g.similarity.push_back(parse_similarity(v));
      else if (key == "stages") {
        if (v.size() != 2 || (v[0] != '0' && v[0] != '1') || (v[1] != '0' && v[1] != '1')) {
          throw InputError("grid line " + std::to_string(line_no) + ": stages values are 00, 01, 10 or 11");
        }
        g.stages.emplace_back(v[0] == '1', v[1] == '1');
      } else {
        throw InputError("grid line " + std::to_string(line_no) + ": unknown axis '" + std::string(key) + "'");
      }
    }
  }
  return g;
}

struct SweepRow {
  CorrectionConfig cell;
  std::string sequence;  // "ALL" for the pooled row
  EvalReport report;
};

inline std::string sweep_csv_header() {
  return "tau_update,tau_overlap,tau_min,tau_dif,similarity,stage1,stage2,sequence,"
         "mota,idf1,fp,fn,idsw,idtp,idfp,idfn,switch_count,switch_mean,switch_median,long_ratio\n";
}

inline std::string format_sweep_row(const SweepRow& r) {
  auto n = [](double v, const char* f = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return std::string(buf);
  };
  const auto& th = r.cell.thresholds;
  const auto& e = r.report;
  std::ostringstream os;
  os << n(th.tau_update, "%.4f") << ',' << n(th.tau_overlap, "%.4f") << ',' << n(th.tau_min, "%.4f")
     << ',' << n(th.tau_dif, "%.4f") << ',' << to_string(r.cell.similarity) << ','
     << (r.cell.stage1 ? 1 : 0) << ',' << (r.cell.stage2 ? 1 : 0) << ',' << r.sequence << ','
     << n(e.mota) << ',' << n(e.idf1) << ',' << e.fp << ',' << e.fn << ',' << e.idsw << ','
     << e.idtp << ',' << e.idfp << ',' << e.idfn << ',' << e.switches.count << ','
     << n(e.switches.mean) << ',' << n(e.switches.median) << ',' << n(e.switches.long_ratio)
     << '\n';
  return os.str();
}

/// Evaluates every (cell, sequence) task, possibly in parallel, and returns rows sorted by
/// their CSV text, pooled "ALL" rows included.
inline std::vector<SweepRow> sweep(const SweepGrid& grid, std::span<const SequenceInput> seqs,
                                   const TrackerConfig& base, const EvalOptions& opt,
                                   unsigned threads) {
  const auto cells = grid.cells(base.correction);
  const std::size_t n_seq = seqs.size();
  std::vector<SequenceEvaluation> evals(cells.size() * n_seq);
  parallel_for(evals.size(), threads, [&](std::size_t task) {
    TrackerConfig cfg = base;
    cfg.correction = cells[task / n_seq];
    evals[task] = run_and_evaluate(seqs[task % n_seq], cfg, opt).eval;
  });
  std::vector<SweepRow> rows;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<SequenceEvaluation> part(evals.begin() + static_cast<long>(c * n_seq),
                                         evals.begin() + static_cast<long>((c + 1) * n_seq));
    for (std::size_t s = 0; s < n_seq; ++s) rows.push_back(SweepRow{cells[c], seqs[s].name, part[s].report});
    rows.push_back(SweepRow{cells[c], "ALL", aggregate(part, opt.tau_long).report});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return format_sweep_row(a) < format_sweep_row(b);
  });
  return rows;
}

inline std::string format_sweep_csv(std::span<const SweepRow> rows) {
  std::string s = sweep_csv_header();
  for (const auto& r : rows) s += format_sweep_row(r);
  return s;
}

}  // namespace fctrack
