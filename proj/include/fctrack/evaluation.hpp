#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fctrack/appearance.hpp"
#include "fctrack/assignment.hpp"
#include "fctrack/error.hpp"
#include "fctrack/geometry.hpp"

namespace fctrack {

/// identity -> frame -> box. At most one box per (identity, frame).
class TrajectorySet {
 public:
  void add(TrackId id, int frame, const BoundingBox& box) {
    auto [it, inserted] = tracks_[id].emplace(frame, box);
    if (!inserted) {
      throw InputError("duplicate box for identity " + std::to_string(id) + " at frame " +
                       std::to_string(frame));
    }
  }

  const std::map<TrackId, std::map<int, BoundingBox>>& tracks() const { return tracks_; }

  std::size_t box_count() const {
    std::size_t n = 0;
    for (const auto& [id, t] : tracks_) n += t.size();
    return n;
  }

  std::set<int> frames() const {
    std::set<int> f;
    for (const auto& [id, t] : tracks_) {
      for (const auto& [frame, box] : t) f.insert(frame);
    }
    return f;
  }

  std::vector<std::pair<TrackId, BoundingBox>> at_frame(int frame) const {
    std::vector<std::pair<TrackId, BoundingBox>> out;
    for (const auto& [id, t] : tracks_) {
      auto it = t.find(frame);
      if (it != t.end()) out.emplace_back(id, it->second);
    }
    return out;
  }

 private:
  std::map<TrackId, std::map<int, BoundingBox>> tracks_;
};

using FrameBoxes = std::vector<std::pair<TrackId, BoundingBox>>;

struct FrameCorrespondence {
  std::map<TrackId, TrackId> matches;  // gt id -> predicted id
  int fp = 0;
  int fn = 0;
};

/// CLEAR-MOT frame matching. Correspondences from the previous frame survive while their
/// IoU stays at or above the threshold; the rest are matched by Hungarian on 1 - IoU.
inline FrameCorrespondence frame_match(const FrameBoxes& gt, const FrameBoxes& pred,
                                       const std::map<TrackId, TrackId>& carry,
                                       double iou_threshold = 0.5) {
  FrameCorrespondence out;
  std::vector<char> gt_used(gt.size(), 0), pred_used(pred.size(), 0);
  for (std::size_t g = 0; g < gt.size(); ++g) {
    auto it = carry.find(gt[g].first);
    if (it == carry.end()) continue;
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (pred_used[p] || pred[p].first != it->second) continue;
      if (iou(gt[g].second, pred[p].second) >= iou_threshold) {
        out.matches[gt[g].first] = pred[p].first;
        gt_used[g] = pred_used[p] = 1;
      }
      break;
    }
  }
  std::vector<std::size_t> gs, ps;
  for (std::size_t g = 0; g < gt.size(); ++g) {
    if (!gt_used[g]) gs.push_back(g);
  }
  for (std::size_t p = 0; p < pred.size(); ++p) {
    if (!pred_used[p]) ps.push_back(p);
  }
  CostMatrix cost(static_cast<Eigen::Index>(gs.size()), static_cast<Eigen::Index>(ps.size()));
  for (std::size_t i = 0; i < gs.size(); ++i) {
    for (std::size_t j = 0; j < ps.size(); ++j) {
      const double o = iou(gt[gs[i]].second, pred[ps[j]].second);
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          o >= iou_threshold ? 1.0 - o : kGated;
    }
  }
  const Assignment a = hungarian_assign(cost, kGated);
  for (auto [r, c] : a.pairs) out.matches[gt[gs[r]].first] = pred[ps[c]].first;
  out.fn = static_cast<int>(gt.size() - out.matches.size());
  out.fp = static_cast<int>(pred.size() - out.matches.size());
  return out;
}

/// Frame-by-frame correspondences over the union of GT and predicted frames.
inline std::map<int, FrameCorrespondence> match_sequence(const TrajectorySet& gt,
                                                         const TrajectorySet& pred,
                                                         double iou_threshold = 0.5) {
  std::set<int> frames = gt.frames();
  for (int f : pred.frames()) frames.insert(f);
  std::map<int, FrameCorrespondence> out;
  std::map<TrackId, TrackId> carry;
  for (int f : frames) {
    auto fc = frame_match(gt.at_frame(f), pred.at_frame(f), carry, iou_threshold);
    carry = fc.matches;
    out.emplace(f, std::move(fc));
  }
  return out;
}

struct ClearMetrics {
  double mota = 0.0;
  long fp = 0;
  long fn = 0;
  long idsw = 0;
  long gt_boxes = 0;
};

inline ClearMetrics clear_from_matches(const std::map<int, FrameCorrespondence>& frames,
                                       std::size_t gt_boxes) {
  ClearMetrics out;
  out.gt_boxes = static_cast<long>(gt_boxes);
  std::map<TrackId, TrackId> last_match;
  for (const auto& [f, fc] : frames) {
    out.fp += fc.fp;
    out.fn += fc.fn;
    for (const auto& [g, p] : fc.matches) {
      auto it = last_match.find(g);
      if (it != last_match.end() && it->second != p) ++out.idsw;
      last_match[g] = p;
    }
  }
  if (gt_boxes > 0) {
    out.mota = 1.0 - static_cast<double>(out.fp + out.fn + out.idsw) / static_cast<double>(gt_boxes);
  }
  return out;
}

inline ClearMetrics clear_metrics(const TrajectorySet& gt, const TrajectorySet& pred,
                                  double iou_threshold = 0.5) {
  if (gt.box_count() == 0) throw InputError("MOTA is undefined for an empty ground truth");
  return clear_from_matches(match_sequence(gt, pred, iou_threshold), gt.box_count());
}

struct IdMetrics {
  long idtp = 0;
  long idfp = 0;
  long idfn = 0;
  double idf1 = 0.0;
};

inline double idf1_score(long idtp, long idfp, long idfn) {
  const long denom = 2 * idtp + idfp + idfn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(idtp) / static_cast<double>(denom);
}

/// Frames where a GT trajectory and a predicted trajectory coexist with IoU >= threshold,
/// for every (gt, pred) pair. Rows follow ascending GT id, columns ascending predicted id.
inline std::vector<std::vector<long>> identity_overlap_counts(const TrajectorySet& gt,
                                                              const TrajectorySet& pred,
                                                              double iou_threshold = 0.5) {
  std::vector<std::vector<long>> counts;
  for (const auto& [gid, gtrack] : gt.tracks()) {
    std::vector<long> row;
    for (const auto& [pid, ptrack] : pred.tracks()) {
      long c = 0;
      for (const auto& [f, gbox] : gtrack) {
        auto it = ptrack.find(f);
        if (it != ptrack.end() && iou(gbox, it->second) >= iou_threshold) ++c;
      }
      row.push_back(c);
    }
    counts.push_back(std::move(row));
  }
  return counts;
}

/// Identity metrics under the globally optimal one-to-one pairing of GT and predicted
/// trajectories. Minimising IDFN + IDFP over pairings is the same as maximising IDTP.
inline IdMetrics id_metrics(const TrajectorySet& gt, const TrajectorySet& pred,
                            double iou_threshold = 0.5) {
  const auto counts = identity_overlap_counts(gt, pred, iou_threshold);
  IdMetrics out;
  const auto n = static_cast<Eigen::Index>(counts.size());
  const auto m = static_cast<Eigen::Index>(pred.tracks().size());
  if (n > 0 && m > 0) {
    CostMatrix cost(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) cost(i, j) = -static_cast<double>(counts[i][j]);
    }
    const auto row_to_col = solve_assignment(cost);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (row_to_col[i] >= 0) out.idtp += counts[i][row_to_col[i]];
    }
  }
  out.idfn = static_cast<long>(gt.box_count()) - out.idtp;
  out.idfp = static_cast<long>(pred.box_count()) - out.idtp;
  out.idf1 = idf1_score(out.idtp, out.idfp, out.idfn);
  return out;
}

struct SwitchEvent {
  TrackId gt_identity = 0;
  int start_frame = 0;
  int end_frame = 0;
  bool recovered = false;

  int duration() const { return end_frame - start_frame + 1; }
};

struct SwitchStats {
  long count = 0;
  double mean = 0.0;
  double median = 0.0;
  double long_ratio = 0.0;  // percent
  bool empty = true;        // mean/median are placeholders when no event exists
};

/// Switch events from the GT side. The first predicted id a GT identity is matched to is
/// its reference id. An event opens on the first frame matched to any other id, extends
/// through every later frame matched to a non-reference id (frames without a match do not
/// close it), and closes when the reference id is matched again or the GT trajectory ends.
inline std::vector<SwitchEvent> switch_events(const TrajectorySet& gt,
                                              const std::map<int, FrameCorrespondence>& frames) {
  std::vector<SwitchEvent> events;
  for (const auto& [gid, gtrack] : gt.tracks()) {
    std::optional<TrackId> reference;
    std::optional<SwitchEvent> open;
    for (const auto& [f, box] : gtrack) {
      auto fit = frames.find(f);
      if (fit == frames.end()) continue;
      auto mit = fit->second.matches.find(gid);
      if (mit == fit->second.matches.end()) continue;
      const TrackId p = mit->second;
      if (!reference) {
        reference = p;
      } else if (open) {
        if (p == *reference) {
          open->recovered = true;
          events.push_back(*open);
          open.reset();
        } else {
          open->end_frame = f;
        }
      } else if (p != *reference) {
        open = SwitchEvent{gid, f, f, false};
      }
    }
    if (open) events.push_back(*open);
  }
  return events;
}

inline SwitchStats summarize_switches(std::span<const SwitchEvent> events, int tau_long) {
  SwitchStats s;
  s.count = static_cast<long>(events.size());
  if (events.empty()) return s;
  s.empty = false;
  std::vector<int> d;
  long total = 0;
  long longer = 0;
  for (const auto& e : events) {
    d.push_back(e.duration());
    total += e.duration();
    if (e.duration() > tau_long) ++longer;
  }
  std::sort(d.begin(), d.end());
  s.mean = static_cast<double>(total) / static_cast<double>(d.size());
  const std::size_t mid = d.size() / 2;
  s.median = d.size() % 2 == 1 ? d[mid] : 0.5 * (d[mid - 1] + d[mid]);
  s.long_ratio = 100.0 * static_cast<double>(longer) / static_cast<double>(d.size());
  return s;
}

inline SwitchStats switch_duration_stats(const TrajectorySet& gt, const TrajectorySet& pred,
                                         int tau_long, std::vector<SwitchEvent>* events_out = nullptr,
                                         double iou_threshold = 0.5) {
  if (tau_long < 1) throw InputError("tau_long must be >= 1");
  auto events = switch_events(gt, match_sequence(gt, pred, iou_threshold));
  auto s = summarize_switches(events, tau_long);
  if (events_out) *events_out = std::move(events);
  return s;
}

struct EvalOptions {
  double iou_threshold = 0.5;
  int tau_long = 10;
};

struct EvalReport {
  long gt_boxes = 0;
  long pred_boxes = 0;
  double mota = 0.0;
  long fp = 0;
  long fn = 0;
  long idsw = 0;
  long idtp = 0;
  long idfp = 0;
  long idfn = 0;
  double idf1 = 0.0;
  SwitchStats switches;
  int tau_long = 10;
};

struct SequenceEvaluation {
  EvalReport report;
  std::vector<SwitchEvent> events;
};

inline SequenceEvaluation evaluate(const TrajectorySet& gt, const TrajectorySet& pred,
                                   const EvalOptions& opt = {}) {
  if (gt.box_count() == 0) throw InputError("cannot evaluate against an empty ground truth");
  if (opt.tau_long < 1) throw InputError("tau_long must be >= 1");
  const auto frames = match_sequence(gt, pred, opt.iou_threshold);
  SequenceEvaluation out;
  auto& r = out.report;
  const auto clear = clear_from_matches(frames, gt.box_count());
  const auto ids = id_metrics(gt, pred, opt.iou_threshold);
  out.events = switch_events(gt, frames);
  r.gt_boxes = clear.gt_boxes;
  r.pred_boxes = static_cast<long>(pred.box_count());
  r.mota = clear.mota;
  r.fp = clear.fp;
  r.fn = clear.fn;
  r.idsw = clear.idsw;
  r.idtp = ids.idtp;
  r.idfp = ids.idfp;
  r.idfn = ids.idfn;
  r.idf1 = ids.idf1;
  r.switches = summarize_switches(out.events, opt.tau_long);
  r.tau_long = opt.tau_long;
  return out;
}

/// Pools counts and switch events over several sequences and recomputes the ratios.
inline SequenceEvaluation aggregate(std::span<const SequenceEvaluation> parts, int tau_long) {
  SequenceEvaluation out;
  auto& r = out.report;
  for (const auto& p : parts) {
    r.gt_boxes += p.report.gt_boxes;
    r.pred_boxes += p.report.pred_boxes;
    r.fp += p.report.fp;
    r.fn += p.report.fn;
    r.idsw += p.report.idsw;
    r.idtp += p.report.idtp;
    r.idfp += p.report.idfp;
    r.idfn += p.report.idfn;
    out.events.insert(out.events.end(), p.events.begin(), p.events.end());
  }
  if (r.gt_boxes > 0) {
    r.mota = 1.0 - static_cast<double>(r.fp + r.fn + r.idsw) / static_cast<double>(r.gt_boxes);
  }
  r.idf1 = idf1_score(r.idtp, r.idfp, r.idfn);
  r.switches = summarize_switches(out.events, tau_long);
  r.tau_long = tau_long;
  return out;
}

inline std::string format_report(const EvalReport& r) {
  std::ostringstream os;
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  os << "gt_boxes=" << r.gt_boxes << '\n'
     << "pred_boxes=" << r.pred_boxes << '\n'
     << "mota=" << num(r.mota) << '\n'
     << "fp=" << r.fp << '\n'
     << "fn=" << r.fn << '\n'
     << "idsw=" << r.idsw << '\n'
     << "idtp=" << r.idtp << '\n'
     << "idfp=" << r.idfp << '\n'
     << "idfn=" << r.idfn << '\n'
     << "idf1=" << num(r.idf1) << '\n'
     << "switch_count=" << r.switches.count << '\n'
     << "switch_mean=" << num(r.switches.mean) << '\n'
     << "switch_median=" << num(r.switches.median) << '\n'
     << "long_ratio=" << num(r.switches.long_ratio) << '\n'
     << "switch_stats_empty=" << (r.switches.empty ? "true" : "false") << '\n'
     << "tau_long=" << r.tau_long << '\n'
     << "hota=unsupported\n";
  return os.str();
}

inline std::string format_events_csv(std::span<const SwitchEvent> events) {
  std::ostringstream os;
  os << "gt_id,start_frame,end_frame,duration,recovered\n";
  for (const auto& e : events) {
    os << e.gt_identity << ',' << e.start_frame << ',' << e.end_frame << ',' << e.duration()
       << ',' << (e.recovered ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace fctrack
