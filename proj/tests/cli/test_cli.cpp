#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "cli/subjects.hpp"
#include "tumorseg/errors.hpp"
#include "tumorseg/labels.hpp"
#include "tumorseg/nifti.hpp"

namespace fs = std::filesystem;
using namespace tumorseg;

namespace {

const fs::path kData = TUMORSEG_TEST_DATA;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result tool(std::vector<std::string> args) {
  args.insert(args.begin(), "tumorseg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "tumorseg_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

double loss_value(const std::string& out) {
  REQUIRE(out.rfind("loss ", 0) == 0);
  return std::strtod(out.c_str() + 5, nullptr);
}

}  // namespace

TEST_CASE("subject ids strip extensions and trailing word segments") {
  CHECK(cli::subject_id("BraTS-GLI-00001-000-seg.nii.gz") == "BraTS-GLI-00001-000");
  CHECK(cli::subject_id("/x/BraTS-GLI-00001-000.nii.gz") == "BraTS-GLI-00001-000");
  CHECK(cli::subject_id("case07-pred.nii") == "case07");
  CHECK(cli::subject_id("case07.nii") == "case07");
  CHECK(cli::subject_id("synth-003-probs.nii.gz") == "synth-003");
  CHECK(cli::subject_id("brain-seg.nii") == "brain-seg");
  CHECK(cli::is_nifti("a.nii.gz"));
  CHECK_FALSE(cli::is_nifti("a.csv"));
}

TEST_CASE("every subcommand prints help and exits 0 without side effects") {
  const auto dir = scratch("help");
  for (const char* cmd : {"preprocess", "threshold", "postprocess", "evaluate", "loss", "clean-gt"}) {
    CAPTURE(cmd);
    const auto r = tool({cmd, "--help", (dir / "a.nii").string(), (dir / "b.nii").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("Usage:") != std::string::npos);
  }
  CHECK(tool({"--help"}).code == 0);
  CHECK(fs::is_empty(dir));
  CHECK(tool({}).code == 2);
  CHECK(tool({"segment"}).code == 2);
  CHECK(tool({"threshold", "--bogus", "a", "b"}).code == 2);
}

TEST_CASE("preprocess reproduces the golden volume") {
  const auto dir = scratch("preprocess");
  const auto r = tool({"preprocess", "--plan", "zscore,rescale", (kData / "preprocess/scan.nii.gz").string(),
                       (dir / "out.nii").string()});
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "out.nii") == slurp(kData / "preprocess/scan_zscore_rescale.nii"));
  CHECK(r.out.find("scan.nii.gz mean=") == 0);
  CHECK(r.out.find(" p98=1.000000") != std::string::npos);

  // Default plan is the same.
  REQUIRE(tool({"preprocess", (kData / "preprocess/scan.nii.gz").string(), (dir / "def.nii").string()}).code == 0);
  CHECK(slurp(dir / "def.nii") == slurp(dir / "out.nii"));
}

TEST_CASE("preprocess with an empty plan copies the volume") {
  const auto dir = scratch("identity");
  const auto in = kData / "preprocess/scan.nii.gz";
  REQUIRE(tool({"preprocess", "--plan", "", in.string(), (dir / "copy.nii").string()}).code == 0);
  const auto a = nifti::read(in), b = nifti::read(dir / "copy.nii");
  CHECK(a.values == b.values);
  CHECK(a.geometry == b.geometry);
  CHECK(b.datatype == nifti::Datatype::kInt16);
}

TEST_CASE("preprocess errors") {
  const auto dir = scratch("preprocess_err");
  const auto missing = (dir / "no_such_scan.nii.gz").string();
  const auto r = tool({"preprocess", missing, (dir / "out.nii").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find(missing) != std::string::npos);
  CHECK(tool({"preprocess", "--plan", "zscore,blur", (kData / "preprocess/scan.nii.gz").string(),
              (dir / "o.nii").string()}).code == 2);
  CHECK(tool({"preprocess", "--plan", "histmatch", (kData / "preprocess/scan.nii.gz").string(),
              (dir / "o.nii").string()}).code == 2);
  // A constant brain has zero spread: computation error.
  nifti::write(ScalarVolume(GridShape{4, 4, 4}, std::vector<double>(64, 5.0)), dir / "flat.nii");
  CHECK(tool({"preprocess", (dir / "flat.nii").string(), (dir / "o.nii").string()}).code == 1);
}

TEST_CASE("threshold and postprocess reproduce golden labels") {
  const auto dir = scratch("threshold");
  const auto probs = kData / "pipeline/probs/synth-001-probs.nii.gz";
  REQUIRE(tool({"threshold", probs.string(), (dir / "t.nii.gz").string()}).code == 0);
  CHECK(nifti::read_labels(dir / "t.nii.gz") == nifti::read_labels(kData / "pipeline/synth-001-threshold.nii.gz"));
  REQUIRE(tool({"threshold", "--wt", "0.45", "--tc", "0.4", "--et", "0.45", probs.string(),
                (dir / "t2.nii.gz").string()}).code == 0);
  CHECK(nifti::read_labels(dir / "t2.nii.gz") == nifti::read_labels(dir / "t.nii.gz"));

  REQUIRE(tool({"postprocess", (dir / "t.nii.gz").string(), (dir / "p.nii.gz").string()}).code == 0);
  CHECK(nifti::read_labels(dir / "p.nii.gz") == nifti::read_labels(kData / "pipeline/synth-001-postprocess.nii.gz"));

  REQUIRE(tool({"threshold", "--wt", "0.9", probs.string(), (dir / "t3.nii.gz").string()}).code == 0);
  CHECK(nifti::read_labels(dir / "t3.nii.gz") != nifti::read_labels(dir / "t.nii.gz"));
}

TEST_CASE("threshold of indicator probabilities returns the labels") {
  const auto dir = scratch("indicator");
  const auto gt = nifti::read_labels(kData / "pipeline/gt/synth-002-seg.nii.gz");
  const auto rs = labels::to_regions(gt);
  const std::vector<ScalarVolume> ch{to_scalar(rs.et), to_scalar(rs.tc), to_scalar(rs.wt)};
  nifti::write_channels(ch, dir / "ind.nii");
  REQUIRE(tool({"threshold", (dir / "ind.nii").string(), (dir / "lab.nii").string()}).code == 0);
  CHECK(nifti::read_labels(dir / "lab.nii") == gt);
}

TEST_CASE("threshold rejects bad thresholds and channel counts") {
  const auto dir = scratch("threshold_err");
  const auto probs = (kData / "pipeline/probs/synth-001-probs.nii.gz").string();
  CHECK(tool({"threshold", "--wt", "1.5", probs, (dir / "o.nii").string()}).code == 2);
  CHECK(tool({"threshold", "--et", "0", probs, (dir / "o.nii").string()}).code == 2);
  const auto r = tool({"threshold", (kData / "pipeline/gt/synth-001-seg.nii.gz").string(), (dir / "o.nii").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("3 channels") != std::string::npos);
  const GridShape s{2, 2, 2};
  const std::vector<ScalarVolume> four(4, ScalarVolume(s, std::vector<double>(8, 0.5)));
  nifti::write_channels(four, dir / "four.nii");
  CHECK(tool({"threshold", (dir / "four.nii").string(), (dir / "o.nii").string()}).code == 2);
  CHECK_FALSE(fs::exists(dir / "o.nii"));
}

TEST_CASE("pipeline run reproduces the stored CSV at any parallelism") {
  const auto dir = scratch("pipeline");
  const auto expected = slurp(kData / "pipeline/expected.csv");
  const auto expected_json = slurp(kData / "pipeline/expected.json");
  for (const char* jobs : {"1", "2", "3", "8"}) {
    CAPTURE(jobs);
    const auto run = dir / (std::string("j") + jobs);
    REQUIRE(tool({"threshold", "-j", jobs, (kData / "pipeline/probs").string(), (run / "labels").string()}).code == 0);
    REQUIRE(tool({"postprocess", "-j", jobs, (run / "labels").string(), (run / "post").string()}).code == 0);
    const auto r = tool({"evaluate", "-j", jobs, "--deterministic", (run / "post").string(),
                         (kData / "pipeline/gt").string(), "-o", (run / "report.csv").string(), "--json",
                         (run / "report.json").string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(run / "report.csv") == expected);
    CHECK(slurp(run / "report.json") == expected_json);
  }
  const auto to_stdout = tool({"evaluate", (dir / "j1/post").string(), (kData / "pipeline/gt").string()});
  CHECK(to_stdout.out == expected);
}

TEST_CASE("evaluate on single files and mismatched directories") {
  const auto dir = scratch("evaluate");
  const auto gt = (kData / "pipeline/gt/synth-001-seg.nii.gz").string();
  const auto single = tool({"evaluate", gt, gt});
  REQUIRE(single.code == 0);
  CHECK(single.out.find("\nsynth-001,1.000000,0.000000,1.000000,0.000000,") != std::string::npos);

  fs::create_directories(dir / "pred");
  fs::copy_file(kData / "pipeline/gt/synth-001-seg.nii.gz", dir / "pred/synth-001-pred.nii.gz");
  fs::copy_file(kData / "pipeline/gt/synth-002-seg.nii.gz", dir / "pred/synth-009-pred.nii.gz");
  const auto r = tool({"evaluate", (dir / "pred").string(), (kData / "pipeline/gt").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("synth-009") != std::string::npos);
  CHECK(r.err.find("synth-002") != std::string::npos);
  CHECK(r.err.find("synth-003") != std::string::npos);
  CHECK(r.out.empty());

  CHECK(tool({"evaluate", (dir / "pred").string(), gt}).code == 2);
}

TEST_CASE("loss subcommand") {
  const auto dir = scratch("loss");
  const auto gt_path = kData / "pipeline/gt/synth-001-seg.nii.gz";
  const auto rs = labels::to_regions(nifti::read_labels(gt_path));
  const std::vector<ScalarVolume> ind{to_scalar(rs.et), to_scalar(rs.tc), to_scalar(rs.wt)};
  nifti::write_channels(ind, dir / "ind.nii");

  const auto same = tool({"loss", "--preset", "COMBO2", (dir / "ind.nii").string(), gt_path.string()});
  REQUIRE(same.code == 0);
  CHECK(loss_value(same.out) <= 2e-5);

  const auto probs = (kData / "pipeline/probs/synth-001-probs.nii.gz").string();
  const auto r = tool({"loss", "--weights", "dice=1,focal=1,edge=0.05", "--gradient", (dir / "g.nii").string(),
                       probs, gt_path.string()});
  REQUIRE(r.code == 0);
  CHECK(loss_value(r.out) > 0.0);
  CHECK(loss_value(r.out) == doctest::Approx(loss_value(tool({"loss", probs, gt_path.string()}).out)));
  CHECK(nifti::read_channels(dir / "g.nii").size() == 3);

  CHECK(tool({"loss", "--preset", "COMBO7", probs, gt_path.string()}).code == 2);
  CHECK(tool({"loss", "--gamma", "-1", probs, gt_path.string()}).code == 2);
  CHECK(tool({"loss", "--preset", "COMBO1", "--weights", "dice=1", probs, gt_path.string()}).code == 2);
}

TEST_CASE("clean-gt subcommand") {
  const auto dir = scratch("clean");
  const auto in = kData / "pipeline/gt/synth-001-seg.nii.gz";
  REQUIRE(tool({"clean-gt", in.string(), (dir / "c.nii").string()}).code == 0);
  const auto cleaned = nifti::read_labels(dir / "c.nii");
  CHECK(labels::to_regions(cleaned).wt.count() <= labels::to_regions(nifti::read_labels(in)).wt.count());
  REQUIRE(tool({"clean-gt", "--dilation-iters", "0", in.string(), (dir / "c0.nii").string()}).code == 0);
  // Without grouping the 27-voxel speck is dust on its own.
  CHECK(labels::to_regions(nifti::read_labels(dir / "c0.nii")).wt.count() ==
        labels::to_regions(nifti::read_labels(in)).wt.count() - 27);
}

TEST_CASE("config file values apply and flags override them") {
  const auto dir = scratch("config");
  const auto probs = (kData / "pipeline/probs/synth-001-probs.nii.gz").string();
  {
    std::ofstream f(dir / "cfg.json");
    f << R"({"thresholds": {"wt": 0.9}, "jobs": 2, "postprocess": {"dust_max": 10}})";
  }
  REQUIRE(tool({"threshold", "--config", (dir / "cfg.json").string(), probs, (dir / "a.nii").string()}).code == 0);
  REQUIRE(tool({"threshold", "--wt", "0.9", probs, (dir / "b.nii").string()}).code == 0);
  CHECK(slurp(dir / "a.nii") == slurp(dir / "b.nii"));
  REQUIRE(tool({"threshold", "--config", (dir / "cfg.json").string(), "--wt", "0.45", probs,
                (dir / "c.nii").string()}).code == 0);
  REQUIRE(tool({"threshold", probs, (dir / "d.nii").string()}).code == 0);
  CHECK(slurp(dir / "c.nii") == slurp(dir / "d.nii"));

  const auto cfg = cli::load_config(dir / "cfg.json");
  CHECK(cfg.thresholds.wt == 0.9);
  CHECK(cfg.thresholds.tc == 0.4);
  CHECK(cfg.jobs == 2);
  CHECK(cfg.postprocess.dust_max == 10);

  CHECK_THROWS_AS(cli::parse_config(R"({"threshold": {}})"), ConfigError);
  CHECK_THROWS_AS(cli::parse_config(R"({"thresholds": {"wt": "high"}})"), ConfigError);
  CHECK_THROWS_AS(cli::parse_config(R"({"jobs": 1.5})"), ConfigError);
  CHECK_THROWS_AS(cli::parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(cli::parse_config(R"({"postprocess": {"foreground_connectivity": 4}})"), ConfigError);
  const auto full = cli::parse_config(R"({
    "preprocess": {"plan": "zscore", "rescale_low": 1, "rescale_high": 99, "histmatch_quantiles": 64},
    "lesion_match": {"dilation_iters": 2, "gt_min_size": 10, "fp_hd95_penalty": 100, "fn_hd95_penalty": 200},
    "loss": {"weights": "dice=1", "focal_gamma": 1.5},
    "deterministic": false})");
  CHECK(full.lesion_match.fn_hd95_penalty == 200.0);
  CHECK(full.loss_spec().terms.size() == 1);
  CHECK(full.focal_gamma == 1.5);
  CHECK_FALSE(full.deterministic);
  CHECK_NOTHROW(full.validate());

  {
    std::ofstream f(dir / "bad.json");
    f << R"({"thresholds": {"wt": 2.0}})";
  }
  CHECK(tool({"threshold", "--config", (dir / "bad.json").string(), probs, (dir / "e.nii").string()}).code == 2);
  CHECK(tool({"threshold", "--config", (dir / "none.json").string(), probs, (dir / "e.nii").string()}).code == 2);
}

TEST_CASE("directory mode output does not depend on ordering mode") {
  const auto dir = scratch("ordering");
  const auto probs = (kData / "pipeline/probs").string();
  REQUIRE(tool({"threshold", "-j", "3", "--no-deterministic", probs, (dir / "a").string()}).code == 0);
  REQUIRE(tool({"threshold", "-j", "1", probs, (dir / "b").string()}).code == 0);
  for (const auto& f : cli::list_volumes(dir / "a")) {
    CHECK(slurp(f) == slurp(dir / "b" / f.filename()));
  }
  CHECK(cli::list_volumes(dir / "a").size() == 3);
}
