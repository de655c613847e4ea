#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "bcsec/probability.hpp"

namespace bcsec {

/// Distribution file:
///   {"alphabets": {"U": 2, ...},
///    "factors": [{"child": "U" | ["V1","V2"], "parents": [...], "probs": nested arrays}, ...]}
/// Factors are listed in chain order; probabilities nest parents first, then children.
JointDistribution joint_from_json(const nlohmann::json& doc);
nlohmann::json joint_to_json(const JointDistribution& j);

JointDistribution load_joint(const std::filesystem::path& path);

/// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace bcsec
