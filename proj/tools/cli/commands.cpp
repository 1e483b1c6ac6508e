#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"
#include "parallel.hpp"
#include "report.hpp"
#include "subjects.hpp"
#include "tumorseg/errors.hpp"
#include "tumorseg/nifti.hpp"
#include "tumorseg/stats.hpp"

namespace tumorseg::cli {
namespace {

namespace fs = std::filesystem;

// Flags shared by every subcommand. Values are applied on top of the
// config file only when given on the command line.
struct CommonFlags {
  std::string config;
  int jobs = 1;
  bool deterministic = true;
  CLI::Option* jobs_opt = nullptr;
  CLI::Option* det_opt = nullptr;

  void attach(CLI::App& app) {
    app.add_option("--config", config, "JSON config file; flags override its values")
        ->check(CLI::ExistingFile);
    jobs_opt = app.add_option("-j,--jobs", jobs, "Subjects processed in parallel")
                   ->check(CLI::PositiveNumber);
    det_opt = app.add_flag("--deterministic,!--no-deterministic", deterministic,
                           "Emit per-subject lines in subject order (default on)");
  }

  PipelineConfig load() const {
    PipelineConfig cfg = config.empty() ? PipelineConfig{} : load_config(config);
    if (jobs_opt->count()) cfg.jobs = jobs;
    if (det_opt->count()) cfg.deterministic = deterministic;
    return cfg;
  }
};

template <typename T>
void override_if(CLI::Option* opt, T& target, const T& value) {
  if (opt->count()) target = value;
}

// Thread-safe line sink. In deterministic mode lines are buffered and
// flushed in index order; otherwise they are written as they arrive.
class LineSink {
 public:
  LineSink(std::ostream& out, std::size_t n, bool ordered) : out_(out), lines_(n), ordered_(ordered) {}

  void emit(std::size_t i, std::string line) {
    if (line.empty()) return;
    std::lock_guard lock(mu_);
    if (ordered_) {
      lines_[i] = std::move(line);
    } else {
      out_ << line << '\n';
    }
  }

  void flush() {
    for (const auto& l : lines_) {
      if (!l.empty()) out_ << l << '\n';
    }
    lines_.clear();
  }

 private:
  std::ostream& out_;
  std::vector<std::string> lines_;
  bool ordered_;
  std::mutex mu_;
};

// Applies `fn(in, out)` to one file, or to every NIfTI volume of a
// directory, writing into the output directory under the same name. The
// string returned by `fn` is printed as one line.
int map_volumes(const fs::path& in, const fs::path& out, const PipelineConfig& cfg, std::ostream& os,
                const std::function<std::string(const fs::path&, const fs::path&)>& fn) {
  std::error_code ec;
  if (!fs::is_directory(in, ec)) {
    const auto line = fn(in, out);
    if (!line.empty()) os << line << '\n';
    return kExitOk;
  }
  if (fs::exists(out, ec) && !fs::is_directory(out, ec)) {
    throw IoError("output must be a directory when the input is: " + out.string());
  }
  const auto files = list_volumes(in);
  if (files.empty()) throw IoError("no NIfTI volumes in " + in.string());
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());

  LineSink sink(os, files.size(), cfg.deterministic);
  parallel_for(files.size(), cfg.jobs,
               [&](std::size_t i) { sink.emit(i, fn(files[i], out / files[i].filename())); });
  sink.flush();
  return kExitOk;
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

RegionProbs read_probs(const fs::path& path) {
  auto ch = nifti::read_channels(path);
  if (ch.size() != 3) {
    throw ShapeError(path.string() + ": expected 3 channels (ET, TC, WT), found " +
                     std::to_string(ch.size()));
  }
  RegionProbs p{std::move(ch[0]), std::move(ch[1]), std::move(ch[2])};
  p.validate();
  return p;
}

void add_preprocess(CLI::App& root, std::function<int()>& action, std::ostream& out) {
  auto* app = root.add_subcommand("preprocess", "Intensity normalisation of a volume or a directory");
  struct Args {
    CommonFlags common;
    std::string input, output, plan, reference;
    CLI::Option *plan_opt = nullptr, *ref_opt = nullptr;
  };
  auto a = std::make_shared<Args>();
  app->add_option("input", a->input, "Input NIfTI file or directory")->required();
  app->add_option("output", a->output, "Output NIfTI file or directory")->required();
  a->plan_opt = app->add_option("--plan", a->plan,
                                "Comma-separated steps: zscore, rescale, histmatch (default zscore,rescale)");
  a->ref_opt = app->add_option("--reference", a->reference, "Reference volume for histmatch");
  a->common.attach(*app);

  app->callback([a, &action, &out] {
    action = [a, &out] {
      auto cfg = a->common.load();
      override_if(a->plan_opt, cfg.plan, a->plan);
      if (a->ref_opt->count()) cfg.reference = a->reference;
      cfg.validate();
      const auto plan = cfg.build_plan();
      return map_volumes(a->input, a->output, cfg, out, [&](const fs::path& in, const fs::path& dst) {
        const auto img = nifti::read(in);
        if (img.channels != 1) throw ShapeError(in.string() + ": expected a 3D volume");
        const ScalarVolume vol(img.geometry, img.values);
        const auto result = preprocess::run_plan(plan, vol);
        nifti::write(result, dst, plan.steps.empty() ? img.datatype : nifti::Datatype::kFloat32);

        auto mask = preprocess::brain_mask(vol);
        if (mask.count() == 0) mask = BinaryMask(vol.shape(), std::vector<std::uint8_t>(vol.size(), 1));
        const auto m = masked_moments(result, mask);
        const auto values = masked_values(result, mask);
        return in.filename().string() + " mean=" + fixed(m.mean) + " std=" + fixed(m.stddev) +
               " p2=" + fixed(percentile(values, 2.0)) + " p98=" + fixed(percentile(values, 98.0));
      });
    };
  });
}

void add_threshold(CLI::App& root, std::function<int()>& action, std::ostream& out) {
  auto* app = root.add_subcommand("threshold", "Decode ET/TC/WT probabilities into labels");
  struct Args {
    CommonFlags common;
    std::string input, output;
    double wt = 0, tc = 0, et = 0;
    CLI::Option *wt_opt = nullptr, *tc_opt = nullptr, *et_opt = nullptr;
  };
  auto a = std::make_shared<Args>();
  app->add_option("input", a->input, "3-channel probability NIfTI (ET, TC, WT) or directory")->required();
  app->add_option("output", a->output, "Output label NIfTI file or directory")->required();
  a->wt_opt = app->add_option("--wt", a->wt, "Whole-tumor threshold (default 0.45)");
  a->tc_opt = app->add_option("--tc", a->tc, "Tumor-core threshold (default 0.4)");
  a->et_opt = app->add_option("--et", a->et, "Enhancing-tumor threshold (default 0.45)");
  a->common.attach(*app);

  app->callback([a, &action, &out] {
    action = [a, &out] {
      auto cfg = a->common.load();
      override_if(a->wt_opt, cfg.thresholds.wt, a->wt);
      override_if(a->tc_opt, cfg.thresholds.tc, a->tc);
      override_if(a->et_opt, cfg.thresholds.et, a->et);
      cfg.validate();
      return map_volumes(a->input, a->output, cfg, out, [&](const fs::path& in, const fs::path& dst) {
        nifti::write(labels::threshold_cascade(read_probs(in), cfg.thresholds), dst);
        return std::string();
      });
    };
  });
}

struct PostprocessFlags {
  std::size_t dust_max = 0;
  int fg = 0, hole = 0;
  CLI::Option *dust_opt = nullptr, *fg_opt = nullptr, *hole_opt = nullptr;

  void attach(CLI::App& app, bool with_connectivity) {
    dust_opt = app.add_option("--dust-max", dust_max, "Components of at most this many voxels are removed (default 50)");
    if (with_connectivity) {
      fg_opt = app.add_option("--connectivity", fg, "Foreground connectivity: 6, 18 or 26 (default 26)");
      hole_opt = app.add_option("--hole-connectivity", hole, "Background connectivity for holes (default 6)");
    }
  }

  void apply(PipelineConfig& cfg) const {
    override_if(dust_opt, cfg.postprocess.dust_max, dust_max);
    if (fg_opt && fg_opt->count()) cfg.postprocess.foreground_connectivity = connectivity_from_int(fg);
    if (hole_opt && hole_opt->count()) cfg.postprocess.hole_background_connectivity = connectivity_from_int(hole);
  }
};

void add_postprocess(CLI::App& root, std::function<int()>& action, std::ostream& out) {
  auto* app = root.add_subcommand("postprocess", "Remove dust components and fill holes they leave");
  struct Args {
    CommonFlags common;
    PostprocessFlags pp;
    std::string input, output;
  };
  auto a = std::make_shared<Args>();
  app->add_option("input", a->input, "Label NIfTI file or directory")->required();
  app->add_option("output", a->output, "Output label NIfTI file or directory")->required();
  a->pp.attach(*app, true);
  a->common.attach(*app);

  app->callback([a, &action, &out] {
    action = [a, &out] {
      auto cfg = a->common.load();
      a->pp.apply(cfg);
      cfg.validate();
      return map_volumes(a->input, a->output, cfg, out, [&](const fs::path& in, const fs::path& dst) {
        nifti::write(postprocess::postprocess_prediction(nifti::read_labels(in), cfg.postprocess), dst);
        return std::string();
      });
    };
  });
}

void add_clean_gt(CLI::App& root, std::function<int()>& action, std::ostream& out) {
  auto* app = root.add_subcommand("clean-gt", "Remove small ground-truth lesions from each region");
  struct Args {
    CommonFlags common;
    PostprocessFlags pp;
    std::string input, output;
    int iters = 0;
    CLI::Option* iters_opt = nullptr;
  };
  auto a = std::make_shared<Args>();
  app->add_option("input", a->input, "Ground-truth label NIfTI file or directory")->required();
  app->add_option("output", a->output, "Output label NIfTI file or directory")->required();
  a->pp.attach(*app, false);
  a->iters_opt = app->add_option("--dilation-iters", a->iters, "Dilation rounds used to group lesions (default 3)");
  a->common.attach(*app);

  app->callback([a, &action, &out] {
    action = [a, &out] {
      auto cfg = a->common.load();
      a->pp.apply(cfg);
      override_if(a->iters_opt, cfg.lesion_match.dilation_iters, a->iters);
      cfg.validate();
      return map_volumes(a->input, a->output, cfg, out, [&](const fs::path& in, const fs::path& dst) {
        nifti::write(postprocess::clean_ground_truth(nifti::read_labels(in), cfg.postprocess,
                                                     cfg.lesion_match.dilation_iters),
                     dst);
        return std::string();
      });
    };
  });
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("write failure in " + path.string());
}

void add_evaluate(CLI::App& root, std::function<int()>& action, std::ostream& out) {
  auto* app = root.add_subcommand("evaluate", "Lesion-wise and legacy Dice / HD95 per subject");
  struct Args {
    CommonFlags common;
    std::string pred, gt, csv, json;
    int iters = 0;
    std::size_t min_size = 0;
    CLI::Option *iters_opt = nullptr, *min_opt = nullptr;
  };
  auto a = std::make_shared<Args>();
  app->add_option("pred", a->pred, "Predicted label NIfTI file or directory")->required();
  app->add_option("gt", a->gt, "Ground-truth label NIfTI file or directory")->required();
  app->add_option("-o,--output", a->csv, "CSV output path (default stdout)");
  app->add_option("--json", a->json, "Also write a JSON report to this path");
  a->iters_opt = app->add_option("--dilation-iters", a->iters, "Dilation rounds for lesion matching (default 3)");
  a->min_opt = app->add_option("--gt-min-size", a->min_size, "Ground-truth lesions of at most this size are ignored (default 50)");
  a->common.attach(*app);

  app->callback([a, &action, &out] {
    action = [a, &out] {
      auto cfg = a->common.load();
      override_if(a->iters_opt, cfg.lesion_match.dilation_iters, a->iters);
      override_if(a->min_opt, cfg.lesion_match.gt_min_size, a->min_size);
      cfg.validate();

      std::error_code ec;
      const bool pred_dir = fs::is_directory(a->pred, ec), gt_dir = fs::is_directory(a->gt, ec);
      std::vector<SubjectPair> pairs;
      if (pred_dir && gt_dir) {
        pairs = pair_directories(a->pred, a->gt);
      } else if (!pred_dir && !gt_dir) {
        pairs.push_back({subject_id(a->gt), a->pred, a->gt});
      } else {
        throw PairingError("pred and gt must both be files or both be directories");
      }

      std::vector<SubjectResult> results(pairs.size());
      parallel_for(pairs.size(), cfg.jobs, [&](std::size_t i) {
        results[i] = {pairs[i].id, metrics::evaluate_case(nifti::read_labels(pairs[i].pred),
                                                          nifti::read_labels(pairs[i].gt), cfg.lesion_match)};
      });

      const auto csv = format_csv(results);
      if (a->csv.empty()) {
        out << csv;
      } else {
        write_text(a->csv, csv);
      }
      if (!a->json.empty()) write_text(a->json, format_json(results));
      return kExitOk;
    };
  });
}

void add_loss(CLI::App& root, std::function<int()>& action, std::ostream& out) {
  auto* app = root.add_subcommand("loss", "Compound loss between probabilities and a label volume");
  struct Args {
    CommonFlags common;
    std::string pred, gt, preset, weights, gradient;
    double gamma = 0;
    CLI::Option *preset_opt = nullptr, *weights_opt = nullptr, *gamma_opt = nullptr;
  };
  auto a = std::make_shared<Args>();
  app->add_option("pred", a->pred, "3-channel probability NIfTI (ET, TC, WT)")->required();
  app->add_option("gt", a->gt, "Ground-truth label NIfTI")->required();
  a->preset_opt = app->add_option("--preset", a->preset, "COMBO1, COMBO2 or COMBO3 (default COMBO2)");
  a->weights_opt = app->add_option("--weights", a->weights, "Explicit weights, e.g. dice=1,focal=1,edge=0.05");
  a->gamma_opt = app->add_option("--gamma", a->gamma, "Focal loss exponent (default 2)");
  app->add_option("--gradient", a->gradient, "Write the 3-channel gradient to this NIfTI path");
  a->preset_opt->excludes(a->weights_opt);
  a->common.attach(*app);

  app->callback([a, &action, &out] {
    action = [a, &out] {
      auto cfg = a->common.load();
      if (a->preset_opt->count()) {
        cfg.loss_preset = a->preset;
        cfg.loss_weights.clear();
      }
      override_if(a->weights_opt, cfg.loss_weights, a->weights);
      override_if(a->gamma_opt, cfg.focal_gamma, a->gamma);
      cfg.validate();

      const auto probs = read_probs(a->pred);
      const auto gt = labels::to_regions(nifti::read_labels(a->gt));
      const auto lv = losses::compound_loss(cfg.loss_spec(), probs, gt);
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.9e", lv.value);
      out << "loss " << buf << '\n';
      if (!a->gradient.empty()) nifti::write_channels(lv.gradient, a->gradient);
      return kExitOk;
    };
  });
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Brain tumor segmentation pipeline tools", "tumorseg"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", "tumorseg 0.1.0");

  std::function<int()> action;
  add_preprocess(app, action, out);
  add_threshold(app, action, out);
  add_postprocess(app, action, out);
  add_clean_gt(app, action, out);
  add_evaluate(app, action, out);
  add_loss(app, action, out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ComputeError& e) {
    err << "error: " << e.what() << '\n';
    return kExitCompute;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCompute;
  }
}

}  // namespace tumorseg::cli
