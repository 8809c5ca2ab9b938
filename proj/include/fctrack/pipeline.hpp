#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fctrack/evaluation.hpp"
#include "fctrack/mot_io.hpp"
#include "fctrack/online_tracker.hpp"

namespace fctrack {

struct PipelineResult {
  std::vector<TrackOutput> outputs;
  RunStats stats;
};

/// Runs the tracker over frames [first_frame, last_frame]; frames without detections are
/// still stepped so that lost tracklets age. last_frame < first_frame means "up to the last
/// frame holding a detection".
inline PipelineResult run_pipeline(const DetectionSequence& detections, const TrackerConfig& config,
                                   int first_frame = 1, int last_frame = 0) {
  if (last_frame < first_frame) last_frame = detections.empty() ? 0 : detections.rbegin()->first;
  OnlineTracker tracker(config);
  PipelineResult out;
  static const std::vector<Detection> kNone;
  for (int f = first_frame; f <= last_frame; ++f) {
    auto it = detections.find(f);
    const auto& dets = it == detections.end() ? kNone : it->second;
    auto emitted = tracker.step(f, dets);
    out.outputs.insert(out.outputs.end(), emitted.begin(), emitted.end());
  }
  out.stats = tracker.stats();
  return out;
}

inline std::string format_run_log(const RunStats& s, const TrackerConfig& cfg) {
  std::ostringstream os;
  os << "frames=" << s.frames << '\n'
     << "detections=" << s.detections << '\n'
     << "tracklets_created=" << s.tracklets_created << '\n'
     << "overlap_pairs=" << s.overlap_pairs << '\n'
     << "reassignments_stage1=" << s.reassignments_stage1 << '\n'
     << "reassignments_stage2=" << s.reassignments_stage2 << '\n'
     << "displaced_detections=" << s.displaced_detections << '\n'
     << "correction=" << (cfg.correction.enabled() ? "enabled" : "disabled") << '\n';
  return os.str();
}

/// One sequence ready to track and score.
struct SequenceInput {
  std::string name;
  DetectionSequence detections;
  TrajectorySet gt;
  int first_frame = 1;
  int last_frame = 0;
};

inline SequenceInput to_sequence_input(const SequenceBundle& b) {
  return SequenceInput{b.meta.name, to_detection_sequence(b), b.gt, 1, b.meta.n_frames};
}

/// Loads a directory written by write_bundle (gt.txt, det.txt, emb.csv or emb.bin,
/// seqinfo.ini).
inline SequenceInput read_sequence_dir(const std::filesystem::path& dir) {
  const auto meta = read_seqinfo((dir / "seqinfo.ini").string());
  const auto bin = dir / "emb.bin";
  const auto emb = std::filesystem::exists(bin) ? bin : dir / "emb.csv";
  SequenceInput s;
  s.name = meta.name.empty() ? dir.filename().string() : meta.name;
  s.detections = read_detections((dir / "det.txt").string(), emb.string(), meta.dim);
  s.gt = read_gt((dir / "gt.txt").string());
  s.first_frame = 1;
  s.last_frame = meta.n_frames;
  return s;
}

struct SequenceRun {
  std::string results;  // MOT result text, byte-exact
  SequenceEvaluation eval;
  RunStats stats;
};

inline SequenceRun run_and_evaluate(const SequenceInput& seq, const TrackerConfig& cfg,
                                    const EvalOptions& opt = {}) {
  auto res = run_pipeline(seq.detections, cfg, seq.first_frame, seq.last_frame);
  SequenceRun out;
  out.eval = evaluate(seq.gt, to_trajectories(res.outputs), opt);
  out.results = format_results(std::move(res.outputs));
  out.stats = res.stats;
  return out;
}

/// Worker count: FC_TRACK_THREADS when set to a positive integer, else the hardware count.
inline unsigned worker_threads() {
  if (const char* env = std::getenv("FC_TRACK_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls task(i) for i in [0, n) on up to `threads` workers. Every task writes only its own
/// output slot, so results do not depend on scheduling. The first exception is rethrown.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& task) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      while (!failed.load()) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) break;
        try {
          task(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// Runs one configuration over many sequences and pools the evaluation.
struct SuiteRun {
  std::vector<SequenceRun> runs;
  SequenceEvaluation pooled;
};

inline SuiteRun run_many(std::span<const SequenceInput> seqs, const TrackerConfig& cfg,
                         const EvalOptions& opt, unsigned threads) {
  SuiteRun out;
  out.runs.resize(seqs.size());
  parallel_for(seqs.size(), threads, [&](std::size_t i) { out.runs[i] = run_and_evaluate(seqs[i], cfg, opt); });
  std::vector<SequenceEvaluation> evals;
  for (const auto& r : out.runs) evals.push_back(r.eval);
  out.pooled = aggregate(evals, opt.tau_long);
  return out;
}

}  // namespace fctrack
