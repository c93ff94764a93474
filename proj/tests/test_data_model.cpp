#include <gtest/gtest.h>

#include <filesystem>

#include "mmgf/rng.hpp"
#include "mmgf/segments.hpp"
#include "mmgf/session_io.hpp"
#include "mmgf/types.hpp"

namespace fs = std::filesystem;
using mmgf::ClassId;
using mmgf::GestureSegment;
using mmgf::LabelSequence;
using mmgf::MealSession;

namespace {

constexpr ClassId O = ClassId::Other;
constexpr ClassId E = ClassId::Eating;
constexpr ClassId D = ClassId::Drinking;

LabelSequence make_labels(std::vector<ClassId> v, double fps = 25.0) {
  LabelSequence s;
  s.labels = std::move(v);
  s.frame_rate = fps;
  return s;
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mmgf_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

MealSession random_session(uint64_t seed, int n_frames) {
  mmgf::Rng rng(seed);
  MealSession s;
  s.session_id = "s" + std::to_string(seed);
  mmgf::RdtCube cube;
  cube.data = mmgf::Tensor<float>({4, 6, n_frames});
  for (size_t i = 0; i < cube.data.size(); ++i)
    cube.data.data()[i] = static_cast<float>(rng.normal());
  s.radar = std::move(cube);
  mmgf::ImuSequence imu;
  imu.data = mmgf::Tensor<float>({12, n_frames});
  for (size_t i = 0; i < imu.data.size(); ++i)
    imu.data.data()[i] = static_cast<float>(rng.normal());
  imu.channel_layout = mmgf::ImuSequence::two_hand_layout();
  s.imu = std::move(imu);
  // Random non-overlapping gesture runs.
  std::vector<ClassId> labels(static_cast<size_t>(n_frames), O);
  int t = rng.uniform_int(10);
  while (t < n_frames) {
    const int len = 1 + rng.uniform_int(40);
    const ClassId c = rng.uniform() < 0.6 ? E : D;
    for (int u = t; u < std::min(n_frames, t + len); ++u)
      labels[static_cast<size_t>(u)] = c;
    t += len + 1 + rng.uniform_int(30);
  }
  s.labels = make_labels(std::move(labels));
  s.meta["participant"] = "p01";
  s.meta["eating_style"] = "fork_knife";
  s.meta["dominant_hand"] = "right";
  return s;
}

}  // namespace

// ===== labels <-> segments =====

TEST(Segments, HandCase) {
  const auto seq = make_labels({O, O, E, E, E, O, D, D});
  const auto segs = mmgf::labels_to_segments(seq);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[0], (GestureSegment{2, 5, E}));
  EXPECT_EQ(segs[1], (GestureSegment{6, 8, D}));
}

TEST(Segments, AdjacentDifferentClassesStaySeparate) {
  const auto segs = mmgf::labels_to_segments(make_labels({E, E, D, D, E}));
  ASSERT_EQ(segs.size(), 3u);
  EXPECT_EQ(segs[0], (GestureSegment{0, 2, E}));
  EXPECT_EQ(segs[1], (GestureSegment{2, 4, D}));
  EXPECT_EQ(segs[2], (GestureSegment{4, 5, E}));
}

TEST(Segments, PaintIsInverseOfExtract) {
  mmgf::Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + rng.uniform_int(120);
    std::vector<ClassId> labels(static_cast<size_t>(n));
    for (auto& c : labels) c = static_cast<ClassId>(rng.uniform_int(3));
    const auto seq = make_labels(labels);
    const auto segs = mmgf::labels_to_segments(seq);
    const auto painted = mmgf::paint_segments(segs, n);
    ASSERT_EQ(painted.labels, seq.labels) << "trial " << trial;
    // Segments are maximal runs: no zero-length, no same-class adjacency.
    for (size_t i = 0; i < segs.size(); ++i) {
      EXPECT_GT(segs[i].length(), 0);
      if (i)
        EXPECT_TRUE(segs[i - 1].end_frame < segs[i].start_frame ||
                    segs[i - 1].class_id != segs[i].class_id);
    }
  }
}

TEST(Segments, PaintRejectsOutOfRange) {
  EXPECT_THROW(mmgf::paint_segments({{5, 4, E}}, 10), mmgf::ValidationError);
  EXPECT_THROW(mmgf::paint_segments({{0, 11, E}}, 10), mmgf::ValidationError);
}

// ===== session validation =====

TEST(Session, NanRadarIsNamedInError) {
  auto s = random_session(1, 50);
  s.radar->data(2, 3, 10) = std::numeric_limits<float>::quiet_NaN();
  try {
    s.validate();
    FAIL() << "expected ValidationError";
  } catch (const mmgf::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("radar"), std::string::npos);
  }
}

TEST(Session, LengthMismatchRejected) {
  auto s = random_session(2, 50);
  s.labels.labels.resize(49);
  EXPECT_THROW(s.validate(), mmgf::ValidationError);
}

TEST(Session, NeedsAtLeastOneModality) {
  auto s = random_session(3, 20);
  s.radar.reset();
  s.imu.reset();
  EXPECT_THROW(s.validate(), mmgf::ValidationError);
}

// ===== session directory round-trip =====

TEST(SessionIo, LabelsCsvFrameMapping) {
  // start_s=1.00, end_s=2.00 at 25 fps covers frames [25, 50).
  const auto dir = temp_dir("labels_map");
  {
    std::ofstream out(dir / "labels.csv");
    out << "start_s,end_s,label\n1.000,2.000,eating\n";
  }
  const auto seq = mmgf::read_labels_csv(dir / "labels.csv", 60, 25.0, nullptr);
  const auto segs = mmgf::labels_to_segments(seq);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0], (GestureSegment{25, 50, E}));
  fs::remove_all(dir);
}

TEST(SessionIo, RoundTripIsExactOverRandomSessions) {
  const auto dir = temp_dir("session_rt");
  for (uint64_t seed = 0; seed < 25; ++seed) {
    const int n = 1 + static_cast<int>(seed) * 37 % 400;
    const auto s = random_session(seed + 100, n);
    const fs::path sd = dir / ("session_" + std::to_string(seed));
    mmgf::save_session(s, sd);
    const auto back = mmgf::load_session(sd);
    EXPECT_EQ(back.session_id, s.session_id);
    EXPECT_EQ(back.labels.labels, s.labels.labels) << "seed " << seed;
    ASSERT_TRUE(back.radar && back.imu);
    ASSERT_TRUE(back.radar->data.same_shape(s.radar->data));
    for (size_t i = 0; i < s.radar->data.size(); ++i)
      ASSERT_EQ(std::bit_cast<uint32_t>(back.radar->data.data()[i]),
                std::bit_cast<uint32_t>(s.radar->data.data()[i]));
    for (size_t i = 0; i < s.imu->data.size(); ++i)
      ASSERT_EQ(std::bit_cast<uint32_t>(back.imu->data.data()[i]),
                std::bit_cast<uint32_t>(s.imu->data.data()[i]));
    EXPECT_EQ(back.meta.at("eating_style"), "fork_knife");
  }
  fs::remove_all(dir);
}

TEST(SessionIo, SavedBytesAreDeterministic) {
  const auto dir = temp_dir("session_det");
  const auto s = random_session(7, 123);
  mmgf::save_session(s, dir / "a");
  mmgf::save_session(s, dir / "b");
  EXPECT_EQ(mmgf::hash_directory(dir / "a"), mmgf::hash_directory(dir / "b"));
  fs::remove_all(dir);
}

TEST(SessionIo, SameClassOverlapRejectedCrossClassWarned) {
  const auto dir = temp_dir("overlap");
  {
    std::ofstream out(dir / "labels.csv");
    out << "start_s,end_s,label\n0.000,1.000,eating\n0.500,1.500,eating\n";
  }
  EXPECT_THROW(mmgf::read_labels_csv(dir / "labels.csv", 100, 25.0, nullptr),
               mmgf::ValidationError);
  {
    std::ofstream out(dir / "labels.csv");
    out << "start_s,end_s,label\n0.000,1.000,eating\n0.500,1.500,drinking\n";
  }
  std::vector<std::string> warnings;
  const auto seq =
      mmgf::read_labels_csv(dir / "labels.csv", 100, 25.0, &warnings);
  EXPECT_EQ(warnings.size(), 1u);
  // Later row wins on the contested frames.
  EXPECT_EQ(seq.labels[20], D);
  fs::remove_all(dir);
}

TEST(SessionIo, MissingMetaKeyIsNamed) {
  const auto dir = temp_dir("meta_missing");
  fs::create_directories(dir / "s");
  {
    std::ofstream out(dir / "s" / "meta.txt");
    out << "session_id=s\nframe_rate=25\n";
  }
  {
    std::ofstream out(dir / "s" / "labels.csv");
    out << "start_s,end_s,label\n";
  }
  try {
    mmgf::load_session(dir / "s");
    FAIL() << "expected ValidationError";
  } catch (const mmgf::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("n_frames"), std::string::npos);
  }
  fs::remove_all(dir);
}
