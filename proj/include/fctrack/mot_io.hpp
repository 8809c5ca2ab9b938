#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fctrack/association.hpp"
#include "fctrack/error.hpp"
#include "fctrack/evaluation.hpp"
#include "fctrack/online_tracker.hpp"
#include "fctrack/scenario.hpp"

// MOT Challenge text files plus the embedding sidecar.
//
//   detections: frame,-1,left,top,width,height,conf,-1,-1,-1
//   results:    frame,id,left,top,width,height,conf,-1,-1,-1
//   gt:         frame,id,left,top,width,height,consider,class,visibility
//   embeddings: frame,det_index,v1,...,vD   (det_index: 0-based line ordinal within the frame)
//   binary embeddings: "FCEMB01" + uint8 D, then per row uint32 frame, uint32 det_index and
//   D float32, all little-endian.

namespace fctrack {

using DetectionSequence = std::map<int, std::vector<Detection>>;

inline constexpr char kEmbeddingMagic[7] = {'F', 'C', 'E', 'M', 'B', '0', '1'};

namespace io {

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    auto field = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
      field.remove_suffix(1);
    }
    out.push_back(field);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

class LineError {
 public:
  LineError(std::string path, std::size_t line) : path_(std::move(path)), line_(line) {}
  [[noreturn]] void fail(const std::string& msg) const {
    throw InputError(path_ + ":" + std::to_string(line_) + ": " + msg);
  }

 private:
  std::string path_;
  std::size_t line_;
};

inline double to_double(std::string_view s, const LineError& where) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    where.fail("expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

inline long long to_int(std::string_view s, const LineError& where) {
  const double v = to_double(s, where);
  if (v != std::floor(v)) where.fail("expected an integer, got '" + std::string(s) + "'");
  return static_cast<long long>(v);
}

inline std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw InputError("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  return out;
}

inline bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos || line.front() == '#';
}

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline std::string mot_line(int frame, long long id, const BoundingBox& b, double score,
                            const char* score_fmt) {
  std::string s = std::to_string(frame) + "," + std::to_string(id) + "," +
                  fmt("%.2f", b.left()) + "," + fmt("%.2f", b.top()) + "," +
                  fmt("%.2f", b.width()) + "," + fmt("%.2f", b.height()) + "," +
                  fmt(score_fmt, score);
  return s;
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline bool get_u32(std::istream& is, std::uint32_t& v) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
  v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
      (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return true;
}

}  // namespace io

using EmbeddingTable = std::map<std::pair<int, int>, FeatureVector>;

inline bool is_binary_embedding_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char head[7] = {};
  return in.read(head, 7) && std::memcmp(head, kEmbeddingMagic, 7) == 0;
}

inline EmbeddingTable read_embeddings_csv(const std::string& path) {
  auto in = io::open_in(path);
  EmbeddingTable out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::blank(line)) continue;
    const io::LineError where(path, line_no);
    const auto f = io::split(line);
    if (f.size() < 3) where.fail("embedding row needs frame,det_index and at least one value");
    const int frame = static_cast<int>(io::to_int(f[0], where));
    const int index = static_cast<int>(io::to_int(f[1], where));
    if (dim == 0) dim = f.size() - 2;
    if (f.size() - 2 != dim) {
      where.fail("embedding dimension " + std::to_string(f.size() - 2) + " differs from " +
                 std::to_string(dim));
    }
    std::vector<float> v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = static_cast<float>(io::to_double(f[i + 2], where));
    try {
      if (!out.emplace(std::make_pair(frame, index), FeatureVector(std::move(v))).second) {
        where.fail("duplicate embedding row for frame " + std::to_string(frame) + ", index " +
                   std::to_string(index));
      }
    } catch (const InputError& e) {
      if (std::string(e.what()).rfind(path, 0) == 0) throw;
      where.fail(e.what());
    }
  }
  return out;
}

inline EmbeddingTable read_embeddings_binary(const std::string& path) {
  auto in = io::open_in(path, true);
  char head[8];
  if (!in.read(head, 8) || std::memcmp(head, kEmbeddingMagic, 7) != 0) {
    throw InputError(path + ": missing FCEMB01 header");
  }
  const int dim = static_cast<unsigned char>(head[7]);
  if (dim == 0) throw InputError(path + ": embedding dimension is 0");
  EmbeddingTable out;
  std::size_t row = 0;
  while (true) {
    std::uint32_t frame = 0;
    if (!io::get_u32(in, frame)) break;
    std::uint32_t index = 0;
    if (!io::get_u32(in, index)) throw InputError(path + ": truncated record " + std::to_string(row));
    std::vector<float> v(dim);
    for (int i = 0; i < dim; ++i) {
      std::uint32_t bits = 0;
      if (!io::get_u32(in, bits)) throw InputError(path + ": truncated record " + std::to_string(row));
      std::memcpy(&v[i], &bits, 4);
    }
    out.emplace(std::make_pair(static_cast<int>(frame), static_cast<int>(index)), FeatureVector(std::move(v)));
    ++row;
  }
  return out;
}

inline EmbeddingTable read_embeddings(const std::string& path) {
  return is_binary_embedding_file(path) ? read_embeddings_binary(path) : read_embeddings_csv(path);
}

/// Detection lines joined to embedding rows by (frame, per-frame ordinal).
inline DetectionSequence read_detections(const std::string& det_path, const std::string& emb_path,
                                         int expected_dim = 0) {
  const EmbeddingTable emb = read_embeddings(emb_path);
  auto in = io::open_in(det_path);
  DetectionSequence out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = expected_dim > 0 ? static_cast<std::size_t>(expected_dim) : 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::blank(line)) continue;
    const io::LineError where(det_path, line_no);
    const auto f = io::split(line);
    if (f.size() < 7) where.fail("expected at least 7 comma-separated fields");
    const int frame = static_cast<int>(io::to_int(f[0], where));
    if (frame < 1) where.fail("frame numbers start at 1");
    const double l = io::to_double(f[2], where), t = io::to_double(f[3], where);
    const double w = io::to_double(f[4], where), h = io::to_double(f[5], where);
    const double conf = io::to_double(f[6], where);
    if (conf < 0.0 || conf > 1.0) where.fail("confidence must lie in [0, 1]");
    if (w <= 0.0 || h <= 0.0) where.fail("box must have positive width and height");

    auto& frame_dets = out[frame];
    const int ordinal = static_cast<int>(frame_dets.size());
    auto it = emb.find({frame, ordinal});
    if (it == emb.end()) {
      throw InputError("missing embedding for frame " + std::to_string(frame) + ", detection " +
                       std::to_string(ordinal) + " (" + det_path + ":" + std::to_string(line_no) + ")");
    }
    if (dim == 0) dim = it->second.size();
    if (it->second.size() != dim) {
      throw InputError("embedding for frame " + std::to_string(frame) + ", detection " +
                       std::to_string(ordinal) + " has dimension " +
                       std::to_string(it->second.size()) + ", expected " + std::to_string(dim));
    }
    Detection d;
    d.frame = frame;
    d.box = BoundingBox(l, t, w, h);
    d.confidence = conf;
    d.feature = it->second;
    d.source_index = ordinal;
    frame_dets.push_back(std::move(d));
  }
  return out;
}

inline DetectionSequence to_detection_sequence(const SequenceBundle& b) {
  DetectionSequence out;
  for (std::size_t f = 0; f < b.detections.size(); ++f) {
    if (!b.detections[f].empty()) out[static_cast<int>(f) + 1] = b.detections[f];
  }
  return out;
}

inline void write_detections(const std::string& path, const DetectionSequence& seq) {
  auto out = io::open_out(path);
  for (const auto& [frame, dets] : seq) {
    for (const auto& d : dets) out << io::mot_line(frame, -1, d.box, d.confidence, "%.4f") << ",-1,-1,-1\n";
  }
}

inline void write_embeddings_csv(const std::string& path, const DetectionSequence& seq) {
  auto out = io::open_out(path);
  for (const auto& [frame, dets] : seq) {
    for (std::size_t i = 0; i < dets.size(); ++i) {
      out << frame << ',' << i;
      for (float v : dets[i].feature.values()) out << ',' << io::fmt("%.9g", v);
      out << '\n';
    }
  }
}

inline void write_embeddings_binary(const std::string& path, const DetectionSequence& seq) {
  std::size_t dim = 0;
  for (const auto& [frame, dets] : seq) {
    if (!dets.empty()) dim = dets.front().feature.size();
  }
  if (dim > 255) throw InputError("binary embeddings support at most 255 dimensions");
  auto out = io::open_out(path, true);
  out.write(kEmbeddingMagic, 7);
  out.put(static_cast<char>(dim));
  for (const auto& [frame, dets] : seq) {
    for (std::size_t i = 0; i < dets.size(); ++i) {
      io::put_u32(out, static_cast<std::uint32_t>(frame));
      io::put_u32(out, static_cast<std::uint32_t>(i));
      for (float v : dets[i].feature.values()) {
        std::uint32_t bits = 0;
        std::memcpy(&bits, &v, 4);
        io::put_u32(out, bits);
      }
    }
  }
}

/// Result lines sorted by (frame, id).
inline std::string format_results(std::vector<TrackOutput> tracks) {
  std::sort(tracks.begin(), tracks.end(), [](const TrackOutput& a, const TrackOutput& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
  });
  std::string s;
  for (const auto& t : tracks) s += io::mot_line(t.frame, t.id, t.box, t.confidence, "%.4f") + ",-1,-1,-1\n";
  return s;
}

inline void write_results(const std::string& path, const std::vector<TrackOutput>& tracks) {
  auto out = io::open_out(path);
  out << format_results(tracks);
  if (!out) throw InputError("failed writing '" + path + "'");
}

inline void write_gt(const std::string& path, const SequenceBundle& b) {
  std::vector<std::pair<int, TrackId>> keys;
  for (const auto& [id, track] : b.gt.tracks()) {
    for (const auto& [f, box] : track) keys.emplace_back(f, id);
  }
  std::sort(keys.begin(), keys.end());
  auto out = io::open_out(path);
  for (auto [f, id] : keys) {
    const auto& box = b.gt.tracks().at(id).at(f);
    double vis = 1.0;
    if (auto it = b.visibility.find(id); it != b.visibility.end()) {
      if (auto jt = it->second.find(f); jt != it->second.end()) vis = jt->second;
    }
    out << io::mot_line(f, id, box, 1.0, "%.0f") << ",1," << io::fmt("%.2f", vis) << '\n';
  }
}

/// Tracker output as trajectories.
inline TrajectorySet to_trajectories(const std::vector<TrackOutput>& tracks) {
  TrajectorySet t;
  for (const auto& o : tracks) t.add(o.id, o.frame, o.box);
  return t;
}

inline TrajectorySet read_results(const std::string& path) {
  auto in = io::open_in(path);
  TrajectorySet t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::blank(line)) continue;
    const io::LineError where(path, line_no);
    const auto f = io::split(line);
    if (f.size() < 6) where.fail("expected at least 6 comma-separated fields");
    try {
      t.add(io::to_int(f[1], where), static_cast<int>(io::to_int(f[0], where)),
            BoundingBox(io::to_double(f[2], where), io::to_double(f[3], where),
                        io::to_double(f[4], where), io::to_double(f[5], where)));
    } catch (const InputError& e) {
      if (std::string(e.what()).rfind(path, 0) == 0) throw;
      where.fail(e.what());
    }
  }
  return t;
}

/// Ground truth, skipping rows flagged not-to-consider (column 7 == 0) and rows whose
/// visibility (column 9, when present) is below min_visibility.
inline TrajectorySet read_gt(const std::string& path, double min_visibility = 0.0) {
  auto in = io::open_in(path);
  TrajectorySet t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::blank(line)) continue;
    const io::LineError where(path, line_no);
    const auto f = io::split(line);
    if (f.size() < 6) where.fail("expected at least 6 comma-separated fields");
    if (f.size() >= 7 && io::to_double(f[6], where) == 0.0) continue;
    if (f.size() >= 9 && io::to_double(f[8], where) < min_visibility) continue;
    try {
      t.add(io::to_int(f[1], where), static_cast<int>(io::to_int(f[0], where)),
            BoundingBox(io::to_double(f[2], where), io::to_double(f[3], where),
                        io::to_double(f[4], where), io::to_double(f[5], where)));
    } catch (const InputError& e) {
      if (std::string(e.what()).rfind(path, 0) == 0) throw;
      where.fail(e.what());
    }
  }
  return t;
}

inline void write_seqinfo(const std::string& path, const SequenceMeta& m) {
  auto out = io::open_out(path);
  out << "[Sequence]\n"
      << "name=" << m.name << '\n'
      << "frameRate=" << io::fmt("%g", m.frame_rate) << '\n'
      << "seqLength=" << m.n_frames << '\n'
      << "imWidth=" << m.image_width << '\n'
      << "imHeight=" << m.image_height << '\n'
      << "embDim=" << m.dim << '\n';
}

inline SequenceMeta read_seqinfo(const std::string& path) {
  auto in = io::open_in(path);
  SequenceMeta m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::blank(line) || line.front() == '[') continue;
    const io::LineError where(path, line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) where.fail("expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string_view val = io::split(std::string_view(line).substr(eq + 1), '\n')[0];
    if (key == "name") m.name = std::string(val);
    else if (key == "frameRate") m.frame_rate = io::to_double(val, where);
    else if (key == "seqLength") m.n_frames = static_cast<int>(io::to_int(val, where));
    else if (key == "imWidth") m.image_width = static_cast<int>(io::to_int(val, where));
    else if (key == "imHeight") m.image_height = static_cast<int>(io::to_int(val, where));
    else if (key == "embDim") m.dim = static_cast<int>(io::to_int(val, where));
  }
  return m;
}

/// Writes gt.txt, det.txt, emb.csv (or emb.bin) and seqinfo.ini into `dir`.
inline void write_bundle(const std::filesystem::path& dir, const SequenceBundle& b,
                         bool binary_embeddings = false) {
  std::filesystem::create_directories(dir);
  const auto seq = to_detection_sequence(b);
  write_gt((dir / "gt.txt").string(), b);
  write_detections((dir / "det.txt").string(), seq);
  if (binary_embeddings) {
    write_embeddings_binary((dir / "emb.bin").string(), seq);
  } else {
    write_embeddings_csv((dir / "emb.csv").string(), seq);
  }
  write_seqinfo((dir / "seqinfo.ini").string(), b.meta);
}

}  // namespace fctrack
