#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "commands.hpp"

namespace strcf {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = 0;
  std::string out, err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "strcf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("strcf_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

/// A short synthetic sequence shared by the tests below.
const fs::path& fixture() {
  static const fs::path dir = [] {
    const auto d = fresh_dir("fixture") / "translate";
    const auto r = run_cli({"synth", "--kind", "translate", "--frames", "12", "--seed", "3", "--out", d.string()});
    EXPECT_EQ(r.code, 0) << r.err;
    return d;
  }();
  return dir;
}

TEST(Track, WritesSummaryAndCurve) {
  const auto out = fresh_dir("track");
  const auto r = run_cli({"track", "--seq", fixture().string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = read_json(out / "translate.json");
  EXPECT_EQ(j.at("kind"), "sequence");
  EXPECT_EQ(j.at("mode"), "strcf");
  EXPECT_EQ(j.at("records").size(), 12u);
  const double auc = j.at("summary").at("auc").get<double>();
  EXPECT_GE(auc, 0.0);
  EXPECT_LE(auc, 1.0);
  EXPECT_EQ(j.at("config").at("solver.mu"), "16");
  const auto csv = lines_of(slurp(out / "translate_success.csv"));
  ASSERT_EQ(csv.size(), 22u);
  EXPECT_EQ(csv[0], "threshold,success");
  EXPECT_NE(r.out.find("translate: mean OP"), std::string::npos);
}

TEST(Track, InterpModeIsTagged) {
  const auto out = fresh_dir("interp");
  const auto r = run_cli({"track", "--seq", fixture().string(), "--out", out.string(), "--mode", "interp"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_json(out / "translate.json").at("mode"), "interp");
}

TEST(Track, NoTimingIsByteReproducible) {
  const auto a = fresh_dir("repro_a"), b = fresh_dir("repro_b");
  ASSERT_EQ(run_cli({"track", "--seq", fixture().string(), "--out", a.string(), "--no-timing"}).code, 0);
  ASSERT_EQ(run_cli({"track", "--seq", fixture().string(), "--out", b.string(), "--no-timing"}).code, 0);
  EXPECT_EQ(slurp(a / "translate.json"), slurp(b / "translate.json"));
  EXPECT_TRUE(read_json(a / "translate.json").at("summary").at("fps").is_null());
}

TEST(Track, OverlayAndSnapshot) {
  const auto out = fresh_dir("overlay");
  const auto r =
      run_cli({"track", "--seq", fixture().string(), "--out", out.string(), "--overlay", "--snapshot"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t frames = 0;
  for (const auto& e : fs::directory_iterator(out / "translate_overlay")) frames += e.path().extension() == ".png";
  EXPECT_EQ(frames, 12u);
  const auto state = load_snapshot(out / "translate.strcf");
  EXPECT_EQ(state.frame_index, 12u);
}

TEST(Track, MissingGroundTruthExitsTwo) {
  const auto seq = fresh_dir("nogt");
  fs::create_directories(seq / "img");
  save_png(seq / "img" / "0001.png", Image(8, 8, 1));
  const auto r = run_cli({"track", "--seq", seq.string(), "--out", fresh_dir("nogt_out").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("groundtruth_rect.txt"), std::string::npos);
}

TEST(Track, ConfigErrorsExitThree) {
  const auto cfg = fresh_dir("cfg") / "bad.cfg";
  std::ofstream(cfg) << "solver.nonsense=1\n";
  EXPECT_EQ(run_cli({"track", "--seq", fixture().string(), "--out", "x", "--config", cfg.string()}).code, 3);
  EXPECT_EQ(run_cli({"track", "--seq", fixture().string(), "--out", "x", "--mode", "bogus"}).code, 3);
  EXPECT_EQ(run_cli({"track", "--bogus-flag"}).code, 3);
  EXPECT_EQ(run_cli({}).code, 3);
}

TEST(Track, ConfigFileIsApplied) {
  const auto dir = fresh_dir("cfg_ok");
  std::ofstream(dir / "run.cfg") << "# fewer scales\nscale.num_scales = 3\nsolver.mu=8\n";
  const auto r = run_cli(
      {"track", "--seq", fixture().string(), "--out", (dir / "out").string(), "--config", (dir / "run.cfg").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = read_json(dir / "out" / "translate.json");
  EXPECT_EQ(j.at("config").at("scale.num_scales"), "3");
  EXPECT_EQ(j.at("config").at("solver.mu"), "8");
}

void write_result(const fs::path& dir, const std::string& name, double iou_value) {
  OpeResult res;
  res.records.push_back({1, {0, 0, 2, 2}, {0, 0, 2, 2}, iou_value});
  res.summary = summarize(res.records, 1, 0.5);
  write_text(dir / (name + ".json"), sequence_json(name, TrackerConfig{}, res, true).dump(2));
}

TEST(Eval, AveragesSequences) {
  const auto dir = fresh_dir("eval");
  write_result(dir, "good", 1.0);
  write_result(dir, "bad", 0.0);
  const auto r = run_cli({"eval", "--results", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mean OP: 50.0%"), std::string::npos) << r.out;
  const auto j = read_json(dir / "dataset.json");
  EXPECT_EQ(j.at("kind"), "dataset");
  EXPECT_EQ(j.at("summary").at("mean_op").get<double>(), 0.5);
  EXPECT_TRUE(fs::exists(dir / "dataset.csv"));
  // A second pass ignores the dataset file it wrote.
  EXPECT_EQ(run_cli({"eval", "--results", dir.string()}).out, r.out);
}

TEST(Eval, EmptyDirectoryExitsTwo) {
  EXPECT_EQ(run_cli({"eval", "--results", fresh_dir("eval_empty").string()}).code, 2);
  EXPECT_EQ(run_cli({"eval", "--results", (fresh_dir("eval_none") / "missing").string()}).code, 2);
}

TEST(Synth, StaticAndTranslateGroundTruth) {
  const auto dir = fresh_dir("synth");
  ASSERT_EQ(run_cli({"synth", "--kind", "static", "--frames", "10", "--out", (dir / "s").string()}).code, 0);
  const auto s = lines_of(slurp(dir / "s" / "groundtruth_rect.txt"));
  ASSERT_EQ(s.size(), 10u);
  for (const auto& l : s) EXPECT_EQ(l, s[0]);

  ASSERT_EQ(run_cli({"synth", "--kind", "translate", "--frames", "10", "--out", (dir / "t").string()}).code, 0);
  std::istringstream gt(slurp(dir / "t" / "groundtruth_rect.txt"));
  const auto boxes = parse_ground_truth(gt);
  ASSERT_EQ(boxes.size(), 10u);
  for (std::size_t i = 1; i < boxes.size(); ++i) EXPECT_DOUBLE_EQ(boxes[i].x - boxes[i - 1].x, 2.0);
  EXPECT_EQ(load_sequence(dir / "t").size(), 10u);
}

TEST(Synth, SameSeedIsByteIdentical) {
  const auto dir = fresh_dir("synth_seed");
  for (const char* sub : {"a", "b"})
    ASSERT_EQ(run_cli({"synth", "--kind", "occlude", "--frames", "6", "--seed", "9", "--out", (dir / sub).string()})
                  .code,
              0);
  for (const auto& e : fs::directory_iterator(dir / "a" / "img"))
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / "img" / e.path().filename()));
  EXPECT_EQ(slurp(dir / "a" / "groundtruth_rect.txt"), slurp(dir / "b" / "groundtruth_rect.txt"));
  EXPECT_EQ(run_cli({"synth", "--kind", "spiral", "--out", (dir / "c").string()}).code, 3);
}

TEST(Diag, OneRowPerFrameAndMu) {
  const auto out = fresh_dir("diag") / "var.csv";
  const auto r = run_cli({"diag", "--seq", fixture().string(), "--sweep-mu", "1,16,1e9", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines_of(slurp(out));
  ASSERT_EQ(rows.size(), 1u + 12u * 3u);
  EXPECT_EQ(rows[0], "frame,mu,variation");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::istringstream row(rows[i]);
    std::string frame, mu, var;
    std::getline(row, frame, ',');
    std::getline(row, mu, ',');
    std::getline(row, var, ',');
    if (mu == "1000000000" && frame != "1") {
      EXPECT_LT(std::stod(var), 1e-6) << rows[i];
    }
  }
  EXPECT_EQ(run_cli({"diag", "--seq", fixture().string(), "--sweep-mu", "-1"}).code, 3);
}

TEST(ConfigFile, DumpParseDumpIsFixedPoint) {
  TrackerConfig cfg;
  cfg.solver.mu = 0.1 + 0.2;
  cfg.features.include_gray = false;
  cfg.mode = UpdateMode::LinearInterpolation;
  cfg.scale.scale_step = 1.0 + 1e-15;
  const std::string text = dump_config(cfg);
  const TrackerConfig back = parse_config(text);
  EXPECT_EQ(back, cfg);
  EXPECT_EQ(dump_config(back), text);
  EXPECT_EQ(dump_config(TrackerConfig{}), dump_config(parse_config(std::string{})));
}

TEST(ConfigFile, RejectsBadInput) {
  for (const char* bad : {"solver.mu=abc\n", "nokey\n", "feature.window=hamming\n", "solver.iters=0\n",
                          "feature.include_gray=maybe\n", "unknown.key=1\n", "solver.mu=nan\n"}) {
    try {
      parse_config(std::string(bad));
      ADD_FAILURE() << "accepted: " << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Config) << bad;
    }
  }
}

TEST(Threads, ParallelForVisitsEveryIndexAndRethrows) {
  std::vector<int> hits(37, 0);
  cli::parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(cli::parallel_for(5, [](std::size_t i) {
                 if (i == 3) throw Error(ErrorKind::Io, "boom");
               }),
               Error);
}

TEST(Threads, BudgetHonorsEnvironment) {
  ::setenv("STRCF_THREADS", "3", 1);
  EXPECT_EQ(cli::thread_budget(), 3u);
  ::setenv("STRCF_THREADS", "0", 1);
  EXPECT_GE(cli::thread_budget(), 1u);
  ::unsetenv("STRCF_THREADS");
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(cli::exit_code_for(ErrorKind::Io), 2);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::MissingGroundTruth), 2);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::Config), 3);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::SymmetryViolation), 4);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::DimMismatch), 4);
}

}  // namespace
}  // namespace strcf
