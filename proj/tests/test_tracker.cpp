#include <gtest/gtest.h>

#include <random>

#include "strcf/eval.hpp"
#include "strcf/snapshot.hpp"
#include "strcf/synth.hpp"
#include "strcf/tracker.hpp"

namespace strcf {
namespace {

Image textured_gray(std::uint64_t seed, int w, int h, int lo = 0, int hi = 255) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(lo, hi);
  const int block = 5;
  const int bw = w / block + 1;
  std::vector<int> tiles(static_cast<std::size_t>(bw * (h / block + 1)));
  for (auto& t : tiles) t = dist(rng);
  Image img(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = static_cast<std::uint8_t>(tiles[(y / block) * bw + x / block]);
  return img;
}

Image shifted(const Image& img, int dx, int dy) {
  Image out(img.width, img.height, img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const int sx = std::clamp(x - dx, 0, img.width - 1), sy = std::clamp(y - dy, 0, img.height - 1);
      for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(sx, sy, c);
    }
  return out;
}

void expect_same_state(const TrackerState<double>& a, const TrackerState<double>& b) {
  EXPECT_EQ(a.config, b.config);
  EXPECT_EQ(a.cx, b.cx);
  EXPECT_EQ(a.cy, b.cy);
  EXPECT_EQ(a.base_width, b.base_width);
  EXPECT_EQ(a.base_height, b.base_height);
  EXPECT_EQ(a.base_side, b.base_side);
  EXPECT_EQ(a.scale, b.scale);
  EXPECT_EQ(a.filter, b.filter);
  EXPECT_EQ(a.spatial_weight, b.spatial_weight);
  EXPECT_EQ(a.label, b.label);
  EXPECT_EQ(a.frame_index, b.frame_index);
  EXPECT_EQ(a.last_variation, b.last_variation);
}

TEST(Label, PeakSymmetryAndFlatLimit) {
  const auto y = gaussian_label(7, 6, 1.3);
  EXPECT_EQ(y(0, 0), 1.0);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      EXPECT_EQ(y(i, j), y((7 - i) % 7, (6 - j) % 6));
      EXPECT_LE(y(i, j), 1.0);
    }
  const auto flat = gaussian_label(5, 5, 1e9);
  for (auto v : flat.values()) EXPECT_NEAR(v, 1.0, 1e-15);
  EXPECT_THROW(gaussian_label(3, 3, 0.0), Error);
}

TEST(SpatialWeightBuild, Examples) {
  const auto w = build_spatial_weight(9, 9, 4.0, 6.0, 0.1, 3.0);
  EXPECT_DOUBLE_EQ(w.grid()(4, 4), 0.1);
  EXPECT_DOUBLE_EQ(w.grid()(6, 4), 0.1 + 3.0);
  EXPECT_DOUBLE_EQ(w.grid()(4, 7), 0.1 + 3.0);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j) EXPECT_GE(w.grid()(i, j), 0.1);
  const auto flat = build_spatial_weight(5, 8, 2.0, 3.0, 0.7, 0.0);
  for (auto v : flat.grid().values()) EXPECT_EQ(v, 0.7);
  EXPECT_THROW(build_spatial_weight(5, 5, 6.0, 2.0, 0.1, 3.0), Error);
}

TEST(Config, DefaultsAndValidation) {
  TrackerConfig cfg;
  EXPECT_EQ(cfg.grid_size(), 50u);
  EXPECT_EQ(cfg.features.channels(), 10);
  cfg.scale.num_scales = 4;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.patch_size = 202;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Init, RejectsDegenerateTarget) {
  const Image img = textured_gray(1, 100, 100);
  try {
    init(img, {50, 50, 1, 1});
    FAIL() << "expected EmptyRegion";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyRegion);
  }
  EXPECT_THROW(init(img, {50, 50, 0, 10}), Error);
}

TEST(Init, IsDeterministic) {
  const Image img = textured_gray(2, 160, 120);
  const Region target{80, 60, 30, 24};
  const auto a = init(img, target);
  const auto b = init(img, target);
  expect_same_state(a, b);
  EXPECT_EQ(a.frame_index, 1u);
  EXPECT_EQ(a.filter.f_cur.channels(), 10u);
  EXPECT_EQ(a.filter.f_cur.rows(), 50u);
}

TEST(Detect, SameFrameGivesZeroDisplacement) {
  const Image img = textured_gray(3, 240, 200);
  const auto s = init(img, {120, 100, 40, 40});
  const auto det = detect(s, img);
  EXPECT_LT(std::hypot(det.dx, det.dy), 0.5);
  EXPECT_EQ(det.best_scale_index, s.config.scale.num_scales / 2);
  EXPECT_GT(det.response_peak, kLowConfidencePeak);
}

TEST(Detect, TwoCellTranslation) {
  // 80 x 100 target: search side sqrt(5 * 8000) = 200 px, so a cell is 4 px.
  const Image img = textured_gray(4, 420, 360);
  const auto s = init(img, {210, 180, 80, 100});
  ASSERT_DOUBLE_EQ(s.cell_pixels(), 4.0);
  const auto det = detect(s, shifted(img, 8, 0));
  EXPECT_NEAR(det.dx, 2.0, 0.25);
  EXPECT_NEAR(det.dy, 0.0, 0.25);
  const auto det_y = detect(s, shifted(img, 0, -8));
  EXPECT_NEAR(det_y.dx, 0.0, 0.25);
  EXPECT_NEAR(det_y.dy, -2.0, 0.25);
}

TEST(Detect, UniformFrameIsLowConfidence) {
  const Image img = textured_gray(5, 200, 200);
  const auto s = init(img, {100, 100, 40, 40});
  const auto det = detect(s, Image(200, 200, 1, 128));
  EXPECT_LT(det.response_peak, kLowConfidencePeak);
}

TEST(Detect, InvariantToIntensityOffsetWithoutGray) {
  TrackerConfig cfg;
  cfg.features.include_gray = false;
  const Image img = textured_gray(6, 200, 160, 20, 200);
  const auto s = init(img, {100, 80, 36, 30}, cfg);
  const Image probe = shifted(textured_gray(6, 200, 160, 20, 200), 3, -2);
  Image brighter = probe;
  for (auto& v : brighter.data) v = static_cast<std::uint8_t>(v + 40);
  const auto a = detect(s, probe);
  const auto b = detect(s, brighter);
  EXPECT_EQ(a.dx, b.dx);
  EXPECT_EQ(a.dy, b.dy);
  EXPECT_EQ(a.best_scale_index, b.best_scale_index);
  EXPECT_EQ(a.response_peak, b.response_peak);
}

TEST(Detect, RequiresInitializedState) { EXPECT_THROW(detect(TrackerState<double>{}, Image(8, 8, 1)), Error); }

TEST(SubcellOffset, RecoversQuadraticPeak) {
  RealGrid<> r(7, 7);
  const double pi = 0.3, pj = -0.2;
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 7; ++j) {
      const double a = static_cast<double>(i) - 3.0 - pi, b = static_cast<double>(j) - 3.0 - pj;
      r(i, j) = 5.0 - a * a - 2.0 * b * b + 0.5 * a * b;
    }
  const auto [oi, oj] = detail::subcell_offset(r, 3, 3);
  // The least-squares fit is exact on a quadratic, cross term included.
  EXPECT_NEAR(oi, pi, 1e-12);
  EXPECT_NEAR(oj, pj, 1e-12);
}

SynthSequence synth(SynthKind kind, int frames) {
  SynthSpec spec;
  spec.kind = kind;
  spec.frames = frames;
  return generate_synthetic(spec);
}

TEST(Step, StaticSequenceStaysLocked) {
  const auto seq = synth(SynthKind::Static, 20);
  auto s = init(seq.frames[0], to_region(seq.truth[0]));
  for (std::size_t t = 1; t < seq.frames.size(); ++t) {
    const Box pred = to_box(step(s, seq.frames[t]));
    EXPECT_GE(iou(pred, seq.truth[t]), 0.9) << "frame " << t + 1;
  }
  EXPECT_EQ(s.frame_index, 20u);
}

TEST(Step, TranslatingSequenceKeepsOverlap) {
  const auto seq = synth(SynthKind::Translate, 50);
  auto s = init(seq.frames[0], to_region(seq.truth[0]));
  for (std::size_t t = 1; t < seq.frames.size(); ++t) {
    const Box pred = to_box(step(s, seq.frames[t]));
    EXPECT_GE(iou(pred, seq.truth[t]), 0.5) << "frame " << t + 1;
  }
}

TEST(Step, HugeMuFreezesFilter) {
  const auto seq = synth(SynthKind::Translate, 8);
  TrackerConfig cfg;
  cfg.solver.mu = 1e9;
  auto s = init(seq.frames[0], to_region(seq.truth[0]), cfg);
  for (std::size_t t = 1; t < seq.frames.size(); ++t) {
    step(s, seq.frames[t]);
    EXPECT_LT(s.last_variation, 1e-6);
  }
}

TEST(Step, CenterMovesAtMostHalfTheSearchSide) {
  auto s = init(textured_gray(7, 300, 300), {150, 150, 40, 40});
  for (std::uint64_t seed = 8; seed < 14; ++seed) {
    const double cx = s.cx, cy = s.cy;
    const double bound = 0.5 * s.search().width * std::pow(s.config.scale.scale_step, s.config.scale.num_scales / 2);
    step(s, textured_gray(seed, 300, 300));
    EXPECT_LE(std::abs(s.cx - cx), bound + 1e-9);
    EXPECT_LE(std::abs(s.cy - cy), bound + 1e-9);
  }
}

TEST(Step, InterpolationWithZeroRateKeepsModel) {
  const auto seq = synth(SynthKind::Static, 3);
  TrackerConfig cfg;
  cfg.mode = UpdateMode::LinearInterpolation;
  cfg.interp_rate = 0.0;
  auto s = init(seq.frames[0], to_region(seq.truth[0]), cfg);
  const auto f0 = s.filter.f_cur;
  step(s, seq.frames[1]);
  EXPECT_EQ(s.filter.f_cur, f0);
  EXPECT_EQ(s.filter.f_prev, f0);
  EXPECT_EQ(s.last_variation, 0.0);
}

TEST(Step, ForcedLocalizationVariationFallsWithMu) {
  const auto seq = synth(SynthKind::Occlude, 24);
  double previous = std::numeric_limits<double>::infinity();
  for (double mu : {1.0, 4.0, 16.0, 64.0}) {
    TrackerConfig cfg;
    cfg.solver.mu = mu;
    auto s = init(seq.frames[0], to_region(seq.truth[0]), cfg);
    double total = 0.0;
    for (std::size_t t = 1; t < seq.frames.size(); ++t) {
      step_at(s, seq.frames[t], to_region(seq.truth[t]), UpdateMode::TemporalRegularized);
      total += s.last_variation;
    }
    const double mean = total / static_cast<double>(seq.frames.size() - 1);
    EXPECT_LE(mean, previous) << "mu=" << mu;
    previous = mean;
  }
}

TEST(Step, SinglePrecisionTracks) {
  const auto seq = synth(SynthKind::Translate, 12);
  auto s = init<float>(seq.frames[0], to_region(seq.truth[0]));
  for (std::size_t t = 1; t < seq.frames.size(); ++t) {
    const Box pred = to_box(step(s, seq.frames[t]));
    EXPECT_GE(iou(pred, seq.truth[t]), 0.5);
  }
}

TEST(Snapshot, RoundTripContinuesIdentically) {
  const auto seq = synth(SynthKind::Translate, 10);
  TrackerConfig cfg;
  cfg.solver.mu = 12.5;
  cfg.scale.num_scales = 3;
  auto s = init(seq.frames[0], to_region(seq.truth[0]), cfg);
  for (std::size_t t = 1; t < 5; ++t) step(s, seq.frames[t]);
  auto restored = deserialize<double>(serialize(s));
  expect_same_state(s, restored);
  for (std::size_t t = 5; t < seq.frames.size(); ++t) {
    const Region a = step(s, seq.frames[t]);
    const Region b = step(restored, seq.frames[t]);
    EXPECT_EQ(a, b);
  }
  expect_same_state(s, restored);
}

TEST(Snapshot, FileRoundTrip) {
  const auto seq = synth(SynthKind::Static, 3);
  const auto s = init(seq.frames[0], to_region(seq.truth[0]));
  const auto path = std::filesystem::temp_directory_path() / "strcf_snapshot_test.strcf";
  save_snapshot(path, s);
  expect_same_state(s, load_snapshot(path));
  std::filesystem::remove(path);
}

TEST(Snapshot, RejectsCorruptInput) {
  const auto seq = synth(SynthKind::Static, 2);
  const auto bytes = serialize(init(seq.frames[0], to_region(seq.truth[0])));
  auto expect_snapshot_error = [](const std::vector<char>& b) {
    try {
      deserialize<double>(b);
      FAIL() << "expected Snapshot error";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Snapshot);
    }
  };
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  expect_snapshot_error(bad_magic);
  expect_snapshot_error(std::vector<char>(bytes.begin(), bytes.begin() + static_cast<long>(bytes.size() / 2)));
  auto trailing = bytes;
  trailing.push_back('\0');
  expect_snapshot_error(trailing);
}

}  // namespace
}  // namespace strcf
