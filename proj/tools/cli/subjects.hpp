#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tumorseg/errors.hpp"

namespace tumorseg::cli {

/// Raised when prediction and ground-truth directories do not pair up.
class PairingError : public InputError {
 public:
  using InputError::InputError;
};

/// True for .nii and .nii.gz files.
bool is_nifti(const std::filesystem::path& path);

/// File name without the .nii / .nii.gz extension.
std::string strip_nifti_extension(const std::filesystem::path& path);

/// Subject identifier of a file name: the extension is removed, then any
/// trailing '-'-separated segments without a digit are dropped.
///   BraTS-GLI-00001-000-seg.nii.gz -> BraTS-GLI-00001-000
///   case07-pred.nii                -> case07
/// A name with no digit anywhere is returned whole.
std::string subject_id(const std::filesystem::path& path);

/// NIfTI files directly inside `dir`, sorted by name. Throws IoError when
/// `dir` is not a readable directory.
std::vector<std::filesystem::path> list_volumes(const std::filesystem::path& dir);

struct SubjectPair {
  std::string id;
  std::filesystem::path pred;
  std::filesystem::path gt;
};

/// Pairs the volumes of two directories by subject id, sorted by id. Throws
/// PairingError naming every unmatched or duplicated subject.
std::vector<SubjectPair> pair_directories(const std::filesystem::path& pred_dir,
                                          const std::filesystem::path& gt_dir);

}  // namespace tumorseg::cli
