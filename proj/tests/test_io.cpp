#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <functional>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "fctrack/mot_io.hpp"
#include "fctrack/pipeline.hpp"
#include "fctrack/presets.hpp"

using namespace fctrack;
namespace fs = std::filesystem;

namespace {

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("fctrack_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string write(const std::string& name, const std::string& text) {
    const auto p = (dir / name).string();
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }
  std::string slurp(const std::string& name) {
    std::ifstream in(dir / name, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  std::string path(const std::string& name) { return (dir / name).string(); }

  fs::path dir;
};

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_F(IoTest, EmptyFilesGiveEmptySequence) {
  const auto seq = read_detections(write("det.txt", ""), write("emb.csv", ""));
  EXPECT_TRUE(seq.empty());
}

TEST_F(IoTest, SingleDetectionLine) {
  const auto seq = read_detections(write("det.txt", "1,-1,10,20,30,40,0.9,-1,-1,-1\n"),
                                   write("emb.csv", "1,0,0.6,0.8\n"));
  ASSERT_EQ(seq.size(), 1u);
  const auto& d = seq.at(1).at(0);
  EXPECT_EQ(d.frame, 1);
  EXPECT_EQ(d.box, BoundingBox(10, 20, 30, 40));
  EXPECT_DOUBLE_EQ(d.confidence, 0.9);
  EXPECT_EQ(d.feature, FeatureVector({0.6f, 0.8f}));
}

TEST_F(IoTest, MalformedLineReportsLineNumber) {
  const auto det = write("det.txt", "1,-1,10,20,30,40,0.9,-1,-1,-1\n1,-1,ten,20,30,40,0.9\n");
  const auto emb = write("emb.csv", "1,0,1\n1,1,1\n");
  EXPECT_NE(error_of([&] { read_detections(det, emb); }).find("det.txt:2:"), std::string::npos);
}

TEST_F(IoTest, MissingEmbeddingNamesFrameAndIndex) {
  const auto det = write("det.txt", "3,-1,10,20,30,40,0.9\n3,-1,50,20,30,40,0.9\n");
  const auto emb = write("emb.csv", "3,0,1,0\n");
  const auto msg = error_of([&] { read_detections(det, emb); });
  EXPECT_NE(msg.find("frame 3, detection 1"), std::string::npos) << msg;
}

TEST_F(IoTest, DimensionMismatchIsAnError) {
  const auto det = write("det.txt", "1,-1,10,20,30,40,0.9\n");
  EXPECT_THROW(read_detections(det, write("a.csv", "1,0,1,0\n1,1,1,0,0\n")), InputError);
  EXPECT_THROW(read_detections(det, write("b.csv", "1,0,1,0\n"), 3), InputError);
}

TEST_F(IoTest, RejectsBadValues) {
  const auto emb = write("emb.csv", "1,0,1\n");
  EXPECT_THROW(read_detections(write("c.txt", "1,-1,10,20,30,40,1.5\n"), emb), InputError);
  EXPECT_THROW(read_detections(write("w.txt", "1,-1,10,20,0,40,0.5\n"), emb), InputError);
  EXPECT_THROW(read_detections(write("f.txt", "0,-1,10,20,5,40,0.5\n"), emb), InputError);
  EXPECT_THROW(read_detections(write("n.txt", "1,-1,10,20\n"), emb), InputError);
  EXPECT_THROW(read_detections(path("absent.txt"), emb), InputError);
}

TEST_F(IoTest, OrdinalsArePerFrame) {
  const auto seq = read_detections(
      write("det.txt", "1,-1,0,0,5,5,0.9\n2,-1,0,0,5,5,0.9\n2,-1,9,0,5,5,0.8\n"),
      write("emb.csv", "2,1,0,1\n2,0,1,1\n1,0,1,0\n"));
  ASSERT_EQ(seq.at(2).size(), 2u);
  EXPECT_EQ(seq.at(2)[1].feature, FeatureVector({0, 1}));
  EXPECT_EQ(seq.at(2)[1].source_index, 1);
}

TEST_F(IoTest, BinarySidecarMatchesCsv) {
  const auto b = generate(make_crossing_scenario(3, 1));
  write_bundle(dir / "csv", b, false);
  write_bundle(dir / "bin", b, true);
  const auto a = read_detections((dir / "csv" / "det.txt").string(), (dir / "csv" / "emb.csv").string());
  const auto c = read_detections((dir / "bin" / "det.txt").string(), (dir / "bin" / "emb.bin").string());
  ASSERT_EQ(a.size(), c.size());
  for (const auto& [f, dets] : a) {
    ASSERT_EQ(dets.size(), c.at(f).size());
    for (std::size_t k = 0; k < dets.size(); ++k) EXPECT_EQ(dets[k].feature, c.at(f)[k].feature);
  }
  // Header: magic plus one dimension byte.
  const auto raw = slurp("bin/emb.bin");
  EXPECT_EQ(raw.substr(0, 7), "FCEMB01");
  EXPECT_EQ(static_cast<unsigned char>(raw[7]), 128);
}

TEST_F(IoTest, TruncatedBinarySidecarIsAnError) {
  std::string bytes = "FCEMB01";
  bytes.push_back(2);
  bytes += std::string("\x01\x00\x00\x00\x00\x00\x00\x00\x00\x00", 10);  // frame 1, index 0, half a value
  EXPECT_THROW(read_embeddings(write("t.bin", bytes)), InputError);
}

TEST_F(IoTest, GeneratedBundleRoundTrips) {
  const auto b = generate(make_crossing_scenario(8, 0));
  write_bundle(dir, b);
  const auto seq = read_sequence_dir(dir);
  EXPECT_EQ(seq.last_frame, b.meta.n_frames);
  const auto want = to_detection_sequence(b);
  ASSERT_EQ(seq.detections.size(), want.size());
  for (const auto& [f, dets] : want) {
    const auto& got = seq.detections.at(f);
    ASSERT_EQ(got.size(), dets.size());
    for (std::size_t k = 0; k < dets.size(); ++k) {
      EXPECT_EQ(got[k].box, dets[k].box);
      EXPECT_EQ(got[k].confidence, dets[k].confidence);
      EXPECT_EQ(got[k].feature, dets[k].feature);
    }
  }
  // GT boxes survive to 2 decimals.
  const auto gt = read_gt(path("gt.txt"));
  ASSERT_EQ(gt.tracks().size(), b.gt.tracks().size());
  for (const auto& [id, t] : b.gt.tracks()) {
    for (const auto& [f, box] : t) {
      const auto& r = gt.tracks().at(id).at(f);
      EXPECT_NEAR(r.left(), box.left(), 0.005);
      EXPECT_NEAR(r.top(), box.top(), 0.005);
      EXPECT_NEAR(r.width(), box.width(), 0.005);
      EXPECT_NEAR(r.height(), box.height(), 0.005);
    }
  }
}

TEST_F(IoTest, GtVisibilityFilter) {
  const auto p = write("gt.txt", "1,1,0,0,10,10,1,1,0.90\n1,2,20,0,10,10,1,1,0.20\n1,3,40,0,10,10,0,1,1.0\n");
  EXPECT_EQ(read_gt(p).box_count(), 2u);  // id 3 flagged not-to-consider
  EXPECT_EQ(read_gt(p, 0.5).box_count(), 1u);
}

TEST_F(IoTest, ResultsEmptyAndOrdered) {
  write_results(path("empty.txt"), {});
  EXPECT_EQ(slurp("empty.txt"), "");
  std::vector<TrackOutput> t{{2, 5, BoundingBox(1, 2, 3, 4), 0.5},
                             {1, 7, BoundingBox(1.234, 2, 3, 4), 0.9},
                             {1, 5, BoundingBox(0, 0, 3, 4), 0.8}};
  write_results(path("r.txt"), t);
  EXPECT_EQ(slurp("r.txt"),
            "1,5,0.00,0.00,3.00,4.00,0.8000,-1,-1,-1\n"
            "1,7,1.23,2.00,3.00,4.00,0.9000,-1,-1,-1\n"
            "2,5,1.00,2.00,3.00,4.00,0.5000,-1,-1,-1\n");
}

TEST_F(IoTest, OneTrackletOverThreeFrames) {
  std::vector<TrackOutput> t;
  for (int f = 1; f <= 3; ++f) t.push_back({f, 4, BoundingBox(f, 0, 10, 10), 0.9});
  const auto text = format_results(t);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_EQ(read_results(write("r.txt", text)).tracks().size(), 1u);
}

TEST_F(IoTest, ResultsRoundTripFuzz) {
  std::mt19937_64 rng(97);
  std::uniform_real_distribution<double> pos(-50, 2000), ext(0.01, 400), conf(0, 1);
  std::uniform_int_distribution<int> frame(1, 500), id(1, 40);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<TrackOutput> t;
    std::set<std::pair<int, int>> used;
    for (int k = 0; k < 200; ++k) {
      const int f = frame(rng), i = id(rng);
      if (!used.insert({f, i}).second) continue;
      t.push_back({f, static_cast<TrackId>(i), BoundingBox(pos(rng), pos(rng), ext(rng), ext(rng)), conf(rng)});
    }
    const auto text = format_results(t);
    const auto back = read_results(write("r.txt", text));
    EXPECT_EQ(back.box_count(), t.size());
    // Re-formatting what was read reproduces the file.
    std::vector<TrackOutput> again;
    for (const auto& [i, tr] : back.tracks()) {
      for (const auto& [f, b] : tr) {
        for (const auto& o : t) {
          if (o.frame == f && o.id == i) again.push_back({f, i, b, o.confidence});
        }
      }
    }
    EXPECT_EQ(format_results(again), text);
  }
}

TEST_F(IoTest, SeqinfoRoundTrip) {
  SequenceMeta m{"seq-a", 25.0, 300, 1280, 720, 64};
  write_seqinfo(path("seqinfo.ini"), m);
  const auto r = read_seqinfo(path("seqinfo.ini"));
  EXPECT_EQ(r.name, "seq-a");
  EXPECT_EQ(r.frame_rate, 25.0);
  EXPECT_EQ(r.n_frames, 300);
  EXPECT_EQ(r.dim, 64);
}
