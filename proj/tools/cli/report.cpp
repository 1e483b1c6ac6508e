#include "report.hpp"

#include <cstdio>

#include <json.hpp>

namespace tumorseg::cli {
namespace {

constexpr const char* kRegionFields[] = {"lesion_dice", "lesion_hd95", "legacy_dice", "legacy_hd95",
                                         "tp",          "fp",          "fn",          "ignored"};
constexpr const char* kMeanFields[] = {"mean_lesion_dice", "mean_lesion_hd95", "mean_legacy_dice",
                                       "mean_legacy_hd95"};

std::string real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Row values in column order; counts are exact in a double.
std::vector<double> row_values(const metrics::EvalReport& r) {
  std::vector<double> v;
  for (const auto& reg : r.regions) {
    v.insert(v.end(), {reg.lesion_wise_dice, reg.lesion_wise_hd95, reg.legacy_dice, reg.legacy_hd95,
                       static_cast<double>(reg.tp), static_cast<double>(reg.fp),
                       static_cast<double>(reg.fn), static_cast<double>(reg.ignored)});
  }
  v.insert(v.end(), {r.mean_lesion_wise_dice, r.mean_lesion_wise_hd95, r.mean_legacy_dice,
                     r.mean_legacy_hd95});
  return v;
}

bool is_count_column(std::size_t col) { return col < 24 && col % 8 >= 4; }

std::vector<double> column_means(const std::vector<SubjectResult>& results) {
  std::vector<double> sum;
  for (const auto& s : results) {
    const auto v = row_values(s.report);
    if (sum.empty()) sum.assign(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) sum[i] += v[i];
  }
  for (auto& x : sum) x /= static_cast<double>(results.size());
  return sum;
}

}  // namespace

std::string csv_header() {
  std::string h = "subject";
  for (auto r : metrics::kRegions) {
    for (const char* f : kRegionFields) {
      h += ',';
      h += metrics::region_name(r);
      h += '_';
      h += f;
    }
  }
  for (const char* f : kMeanFields) {
    h += ',';
    h += f;
  }
  return h;
}

std::string format_csv(const std::vector<SubjectResult>& results) {
  std::string out = csv_header() + "\n";
  for (const auto& s : results) {
    out += s.id;
    const auto v = row_values(s.report);
    for (std::size_t i = 0; i < v.size(); ++i) {
      out += ',';
      out += is_count_column(i) ? std::to_string(static_cast<unsigned long long>(v[i])) : real(v[i]);
    }
    out += '\n';
  }
  if (!results.empty()) {
    out += "mean";
    for (double m : column_means(results)) out += ',' + real(m);
    out += '\n';
  }
  return out;
}

std::string format_json(const std::vector<SubjectResult>& results) {
  using nlohmann::ordered_json;
  auto region_json = [](const metrics::RegionReport& r) {
    ordered_json j;
    j["lesion_dice"] = r.lesion_wise_dice;
    j["lesion_hd95"] = r.lesion_wise_hd95;
    j["legacy_dice"] = r.legacy_dice;
    j["legacy_hd95"] = r.legacy_hd95;
    j["tp"] = r.tp;
    j["fp"] = r.fp;
    j["fn"] = r.fn;
    j["ignored"] = r.ignored;
    return j;
  };

  ordered_json doc;
  doc["subjects"] = ordered_json::array();
  for (const auto& s : results) {
    ordered_json j;
    j["subject"] = s.id;
    for (auto r : metrics::kRegions) j[std::string(metrics::region_name(r))] = region_json(s.report[r]);
    j["mean_lesion_dice"] = s.report.mean_lesion_wise_dice;
    j["mean_lesion_hd95"] = s.report.mean_lesion_wise_hd95;
    j["mean_legacy_dice"] = s.report.mean_legacy_dice;
    j["mean_legacy_hd95"] = s.report.mean_legacy_hd95;
    doc["subjects"].push_back(std::move(j));
  }
  if (!results.empty()) {
    const auto header = csv_header();
    const auto means = column_means(results);
    ordered_json m;
    std::size_t col = 0, start = header.find(',') + 1;
    while (col < means.size()) {
      const auto end = header.find(',', start);
      m[header.substr(start, end - start)] = means[col++];
      if (end == std::string::npos) break;
      start = end + 1;
    }
    doc["mean"] = std::move(m);
  }
  return doc.dump(2) + "\n";
}

}  // namespace tumorseg::cli
