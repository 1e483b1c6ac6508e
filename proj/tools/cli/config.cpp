#include "config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tumorseg/errors.hpp"
#include "tumorseg/preprocess.hpp"

namespace tumorseg::cli {
namespace {

using nlohmann::json;

const json& require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  return j;
}

template <typename Fn>
void for_each_key(const json& obj, const std::string& where, Fn&& fn) {
  for (const auto& [key, value] : require_object(obj, where).items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!fn(key, value, path)) throw ConfigError("config: unknown key '" + path + "'");
  }
}

template <typename T>
T get(const json& v, const std::string& path) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError("");
    } else {
      if (!v.is_string()) throw ConfigError("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config: '" + path + "' has the wrong type");
  }
}

std::size_t get_size(const json& v, const std::string& path) {
  const auto n = get<long long>(v, path);
  if (n < 0) throw ConfigError("config: '" + path + "' must be non-negative");
  return static_cast<std::size_t>(n);
}

}  // namespace

void PipelineConfig::validate() const {
  preprocess::Plan::parse(plan);
  if (!(rescale_low >= 0.0 && rescale_low < rescale_high && rescale_high <= 100.0)) {
    throw ConfigError("rescale percentiles must satisfy 0 <= low < high <= 100");
  }
  if (histmatch_quantiles < 2) throw ConfigError("histmatch quantiles must be at least 2");
  thresholds.validate();
  lesion_match.validate();
  loss_spec();
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
}

preprocess::Plan PipelineConfig::build_plan() const {
  auto p = preprocess::Plan::parse(plan, reference);
  for (auto& step : p.steps) {
    if (auto* r = std::get_if<preprocess::Rescale>(&step)) {
      r->p_low = rescale_low;
      r->p_high = rescale_high;
    } else if (auto* h = std::get_if<preprocess::HistogramMatch>(&step)) {
      h->n_quantiles = histmatch_quantiles;
    }
  }
  p.validate();
  return p;
}

losses::CompoundLossSpec PipelineConfig::loss_spec() const {
  auto spec = loss_weights.empty() ? losses::CompoundLossSpec::preset(loss_preset)
                                   : losses::CompoundLossSpec::parse(loss_weights);
  spec.focal_gamma = focal_gamma;
  spec.validate();
  return spec;
}

PipelineConfig parse_config(const std::string& text, PipelineConfig cfg) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  for_each_key(root, "", [&](const std::string& key, const json& v, const std::string& path) {
    if (key == "jobs") {
      cfg.jobs = get<int>(v, path);
    } else if (key == "deterministic") {
      cfg.deterministic = get<bool>(v, path);
    } else if (key == "preprocess") {
      for_each_key(v, path, [&](const std::string& k, const json& x, const std::string& p) {
        if (k == "plan") cfg.plan = get<std::string>(x, p);
        else if (k == "reference") cfg.reference = get<std::string>(x, p);
        else if (k == "rescale_low") cfg.rescale_low = get<double>(x, p);
        else if (k == "rescale_high") cfg.rescale_high = get<double>(x, p);
        else if (k == "histmatch_quantiles") cfg.histmatch_quantiles = get<int>(x, p);
        else return false;
        return true;
      });
    } else if (key == "thresholds") {
      for_each_key(v, path, [&](const std::string& k, const json& x, const std::string& p) {
        if (k == "wt") cfg.thresholds.wt = get<double>(x, p);
        else if (k == "tc") cfg.thresholds.tc = get<double>(x, p);
        else if (k == "et") cfg.thresholds.et = get<double>(x, p);
        else return false;
        return true;
      });
    } else if (key == "postprocess") {
      for_each_key(v, path, [&](const std::string& k, const json& x, const std::string& p) {
        if (k == "dust_max") cfg.postprocess.dust_max = get_size(x, p);
        else if (k == "foreground_connectivity")
          cfg.postprocess.foreground_connectivity = connectivity_from_int(get<int>(x, p));
        else if (k == "hole_connectivity")
          cfg.postprocess.hole_background_connectivity = connectivity_from_int(get<int>(x, p));
        else return false;
        return true;
      });
    } else if (key == "lesion_match") {
      for_each_key(v, path, [&](const std::string& k, const json& x, const std::string& p) {
        if (k == "dilation_iters") cfg.lesion_match.dilation_iters = get<int>(x, p);
        else if (k == "gt_min_size") cfg.lesion_match.gt_min_size = get_size(x, p);
        else if (k == "fp_hd95_penalty") cfg.lesion_match.fp_hd95_penalty = get<double>(x, p);
        else if (k == "fn_hd95_penalty") cfg.lesion_match.fn_hd95_penalty = get<double>(x, p);
        else return false;
        return true;
      });
    } else if (key == "loss") {
      for_each_key(v, path, [&](const std::string& k, const json& x, const std::string& p) {
        if (k == "preset") {
          cfg.loss_preset = get<std::string>(x, p);
          cfg.loss_weights.clear();
        } else if (k == "weights") {
          cfg.loss_weights = get<std::string>(x, p);
        } else if (k == "focal_gamma") {
          cfg.focal_gamma = get<double>(x, p);
        } else {
          return false;
        }
        return true;
      });
    } else {
      return false;
    }
    return true;
  });
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace tumorseg::cli
