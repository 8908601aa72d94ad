#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace qa {

inline constexpr std::string_view kToolVersion = "1.0.0";

std::string sha256_hex(std::string_view data);
/// Digest of a file's bytes, or of every regular file below a directory
/// (relative path and contents, in sorted path order).
std::string path_sha256(const std::string& path);

/// What a run consumed and produced. Contains no timestamps or host details,
/// so identical runs write identical manifests.
struct Manifest {
  std::string command;
  nlohmann::json config;  ///< fully resolved, paths absolute
  std::vector<std::uint64_t> seeds;
  std::map<std::string, std::string> inputs;   ///< path -> sha256
  std::map<std::string, std::string> outputs;  ///< path -> sha256

  nlohmann::json to_json() const;
  static Manifest from_json(const nlohmann::json& j);
};

void save_manifest(const Manifest& m, const std::string& path);
Manifest load_manifest(const std::string& path);

}  // namespace qa
