#ifndef PCAST_MANIFEST_HPP
#define PCAST_MANIFEST_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace pcast {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a 64-bit over raw bytes; hex string form used in manifests and file
// headers.
std::uint64_t fnv1a64(const std::string& bytes);
std::string digest_hex(std::uint64_t h);
std::string digest_of_file(const std::string& path);

// Reproducibility record written next to every command's outputs. The digest
// identifies the producing run and is computed over (tool version, command,
// arguments, seed, input digests) - outputs then embed it.
struct RunManifest {
  std::string command;
  std::vector<std::string> args;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;   // (path, digest)
  std::vector<std::pair<std::string, std::string>> outputs;  // (path, digest), filled at the end

  std::string digest() const;
  std::string to_json() const;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace pcast

#endif
