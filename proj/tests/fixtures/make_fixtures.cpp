// Regenerates the files under tests/data from library calls:
//   make_fixtures <repo>/tests/data
// The CLI tests then check that the tool reproduces them.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "cli/report.hpp"
#include "random.hpp"
#include "tumorseg/labels.hpp"
#include "tumorseg/metrics.hpp"
#include "tumorseg/nifti.hpp"
#include "tumorseg/postprocess.hpp"
#include "tumorseg/preprocess.hpp"

namespace fs = std::filesystem;
using namespace tumorseg;

namespace {

// Uniform in [0, 1) from the raw engine output, independent of the
// standard library's distribution implementations.
double unit(testing::Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double ellipsoid(const std::array<std::size_t, 3>& p, const std::array<double, 3>& c,
                 const std::array<double, 3>& r) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double d = (static_cast<double>(p[k]) - c[k]) / r[k];
    s += d * d;
  }
  return std::sqrt(s);
}

struct Subject {
  std::string id;
  Geometry geometry;
  LabelVolume gt;
  std::vector<ScalarVolume> probs;  // ET, TC, WT
};

Subject make_subject(int n) {
  testing::Rng rng(1000 + n);
  const GridShape s{40, 32, 32};
  Geometry g{s, {1.0, 1.0, n == 2 ? 1.5 : 1.0}, {}};
  g.orientation.qform_code = 1;
  g.orientation.qoffset = {-16.0f, -16.0f, -16.0f};

  const std::array<double, 3> c{15.0 + n, 16.0 - n, 15.5};
  const std::array<double, 3> sat{5.0, 26.0, 24.0};
  std::vector<std::uint8_t> lab(s.voxels(), 0);
  for (std::size_t i = 0; i < s.voxels(); ++i) {
    const auto p = s.coords(i);
    const double d = ellipsoid(p, c, {10.0, 9.0, 8.0});
    if (d <= 0.55) lab[i] = 1;
    else if (d <= 0.8) lab[i] = 3;
    else if (d <= 1.0) lab[i] = 2;
    if (n != 1 && ellipsoid(p, sat, {3.0, 3.0, 3.0}) <= 1.0) lab[i] = 2;
  }
  // A ground-truth speck small enough to be ignored.
  testing::fill_box<std::uint8_t>(lab, s, 27, 30, 3, 6, 3, 6, 1);

  // Probabilities: a slightly displaced copy of the regions, noise, a few
  // dust specks and one false-positive blob large enough to survive.
  const std::array<double, 3> pc{c[0] + 0.7, c[1] - 0.4, c[2] + 0.5};
  std::vector<double> et(s.voxels()), tc(s.voxels()), wt(s.voxels());
  for (std::size_t i = 0; i < s.voxels(); ++i) {
    const auto p = s.coords(i);
    const double d = ellipsoid(p, pc, {10.5, 9.0, 8.5});
    const bool in_wt = d <= 1.0 || (n == 3 && ellipsoid(p, sat, {3.0, 3.0, 3.0}) <= 1.0);
    const bool in_tc = d <= 0.8;
    const bool in_et = d > 0.5 && d <= 0.8;
    auto prob = [&](bool inside) {
      const double v = inside ? 0.75 + 0.3 * (unit(rng) - 0.5) : 0.12 + 0.68 * (unit(rng) - 0.5);
      return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
    };
    wt[i] = prob(in_wt);
    tc[i] = prob(in_tc);
    et[i] = prob(in_et);
  }
  auto paint = [&](std::size_t x0, std::size_t y0, std::size_t z0, std::size_t e, bool all) {
    for (std::size_t z = z0; z < z0 + e; ++z)
      for (std::size_t y = y0; y < y0 + e; ++y)
        for (std::size_t x = x0; x < x0 + e; ++x) {
          const auto i = s.index(x, y, z);
          wt[i] = 0.9;
          if (all) tc[i] = et[i] = 0.9;
        }
  };
  for (int k = 0; k < 4; ++k) {
    const auto x = static_cast<std::size_t>(1 + unit(rng) * 4);
    const auto y = static_cast<std::size_t>(2 + unit(rng) * 26);
    const auto z = static_cast<std::size_t>(1 + unit(rng) * 28);
    paint(x, y, z, 2 + k % 2, k % 2 == 0);
  }
  paint(35, 14, 14, 4, false);

  Subject out{"synth-00" + std::to_string(n), g, LabelVolume(g, std::move(lab)), {}};
  out.probs.emplace_back(g, std::move(et));
  out.probs.emplace_back(g, std::move(tc));
  out.probs.emplace_back(g, std::move(wt));
  return out;
}

ScalarVolume make_scan() {
  testing::Rng rng(7);
  const GridShape s{24, 24, 24};
  std::vector<double> v(s.voxels(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto p = s.coords(i);
    const double d = ellipsoid(p, {11.5, 11.5, 11.5}, {10.0, 10.0, 9.0});
    if (d > 1.0) continue;
    const double tumor = ellipsoid(p, {14.0, 9.0, 12.0}, {4.0, 4.0, 4.0}) <= 1.0 ? 600.0 : 0.0;
    v[i] = std::round(300.0 + 200.0 * (1.0 - d) + tumor + 80.0 * unit(rng));
  }
  return ScalarVolume(Geometry{s, {1.0, 1.0, 1.0}, {}}, std::move(v));
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <tests/data directory>\n";
    return 2;
  }
  const fs::path root = argv[1];
  const fs::path pipe = root / "pipeline";
  fs::create_directories(pipe / "probs");
  fs::create_directories(pipe / "gt");
  fs::create_directories(root / "preprocess");

  std::vector<cli::SubjectResult> results;
  for (int n = 1; n <= 3; ++n) {
    const auto sub = make_subject(n);
    nifti::write_channels(sub.probs, pipe / "probs" / (sub.id + "-probs.nii.gz"));
    nifti::write(sub.gt, pipe / "gt" / (sub.id + "-seg.nii.gz"));

    const RegionProbs probs{sub.probs[0], sub.probs[1], sub.probs[2]};
    const auto raw = labels::threshold_cascade(probs);
    const auto post = postprocess::postprocess_prediction(raw);
    if (n == 1) {
      nifti::write(raw, pipe / "synth-001-threshold.nii.gz");
      nifti::write(post, pipe / "synth-001-postprocess.nii.gz");
    }
    results.push_back({sub.id, metrics::evaluate_case(post, sub.gt)});
  }
  write_text(pipe / "expected.csv", cli::format_csv(results));
  write_text(pipe / "expected.json", cli::format_json(results));

  const auto scan = make_scan();
  nifti::write(scan, root / "preprocess" / "scan.nii.gz", nifti::Datatype::kInt16);
  const auto processed = preprocess::run_plan(preprocess::Plan::parse("zscore,rescale"), scan);
  nifti::write(processed, root / "preprocess" / "scan_zscore_rescale.nii");
  return 0;
}
