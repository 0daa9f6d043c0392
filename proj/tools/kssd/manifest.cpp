#include "kssd/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>

#include "kssd/errors.hpp"

namespace kssd::cli {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.emplace_back(path.string(), file_digest(path));
}

void RunManifest::write(std::ostream& out) const {
  out << "subcommand=" << subcommand << '\n';
  out << "version=" << version << '\n';
  out << "seed=" << seed << '\n';
  out << "digest_algorithm=fnv1a64\n";
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    out << "input." << i << ".path=" << inputs[i].first << '\n';
    out << "input." << i << ".digest=" << inputs[i].second << '\n';
  }
  for (const auto& [k, v] : params) out << "param." << k << '=' << v << '\n';
}

}  // namespace kssd::cli
