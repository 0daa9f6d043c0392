#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace kssd::cli {

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// fnv1a64 of a file's contents as 16 lowercase hex digits.
std::string file_digest(const std::filesystem::path& path);

/// Record of one CLI invocation, written as key=value lines.
struct RunManifest {
  std::string subcommand;
  std::map<std::string, std::string> params;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
  std::uint64_t seed = 0;
  std::string version;

  void add_input(const std::filesystem::path& path);
  void write(std::ostream& out) const;
};

}  // namespace kssd::cli
