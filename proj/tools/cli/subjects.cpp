#include "subjects.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace tumorseg::cli {
namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool has_digit(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::map<std::string, std::filesystem::path> index_by_id(const std::filesystem::path& dir,
                                                         std::vector<std::string>& problems) {
  std::map<std::string, std::filesystem::path> ids;
  for (const auto& p : list_volumes(dir)) {
    const auto id = subject_id(p);
    auto [it, inserted] = ids.emplace(id, p);
    if (!inserted) {
      problems.push_back("duplicate subject " + id + " in " + dir.string() + ": " +
                         it->second.filename().string() + ", " + p.filename().string());
    }
  }
  return ids;
}

}  // namespace

bool is_nifti(const std::filesystem::path& path) {
  const auto name = path.filename().string();
  return ends_with(name, ".nii") || ends_with(name, ".nii.gz");
}

std::string strip_nifti_extension(const std::filesystem::path& path) {
  auto name = path.filename().string();
  for (const char* ext : {".nii.gz", ".nii"}) {
    if (ends_with(name, ext)) return name.substr(0, name.size() - std::string(ext).size());
  }
  return name;
}

std::string subject_id(const std::filesystem::path& path) {
  const std::string stem = strip_nifti_extension(path);
  std::size_t end = stem.size();
  while (end > 0) {
    const auto dash = stem.rfind('-', end - 1);
    const std::size_t begin = dash == std::string::npos ? 0 : dash + 1;
    if (has_digit(std::string_view(stem).substr(begin, end - begin))) return stem.substr(0, end);
    if (dash == std::string::npos) break;
    end = dash;
  }
  return stem;
}

std::vector<std::filesystem::path> list_volumes(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && is_nifti(entry.path())) out.push_back(entry.path());
  }
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SubjectPair> pair_directories(const std::filesystem::path& pred_dir,
                                          const std::filesystem::path& gt_dir) {
  std::vector<std::string> problems;
  const auto preds = index_by_id(pred_dir, problems);
  const auto gts = index_by_id(gt_dir, problems);

  std::vector<SubjectPair> pairs;
  for (const auto& [id, path] : preds) {
    const auto it = gts.find(id);
    if (it == gts.end()) {
      problems.push_back("unmatched prediction: " + id);
    } else {
      pairs.push_back({id, path, it->second});
    }
  }
  for (const auto& [id, path] : gts) {
    if (!preds.count(id)) problems.push_back("unmatched ground truth: " + id);
  }
  if (pairs.empty() && problems.empty()) {
    throw PairingError("no NIfTI volumes found in " + pred_dir.string() + " or " + gt_dir.string());
  }
  if (!problems.empty()) {
    std::string msg = "subject pairing failed";
    for (const auto& p : problems) msg += "\n  " + p;
    throw PairingError(msg);
  }
  return pairs;
}

}  // namespace tumorseg::cli
