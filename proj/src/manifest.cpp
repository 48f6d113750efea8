#include "pcast/manifest.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pcast/errors.hpp"

namespace pcast {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_hex(std::uint64_t h) {
  static const char* hex = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = hex[h & 0xf];
    h >>= 4;
  }
  return s;
}

std::string digest_of_file(const std::string& path) {
  return digest_hex(fnv1a64(read_text_file(path)));
}

std::string RunManifest::digest() const {
  std::ostringstream os;
  os << kToolVersion << '\n' << command << '\n';
  for (const auto& a : args) os << a << '\n';
  os << seed << '\n';
  for (const auto& [path, d] : inputs) os << path << '=' << d << '\n';
  return digest_hex(fnv1a64(os.str()));
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["tool"] = "pcast";
  j["version"] = kToolVersion;
  j["command"] = command;
  j["args"] = args;
  j["seed"] = seed;
  auto files = [](const std::vector<std::pair<std::string, std::string>>& xs) {
    auto arr = nlohmann::json::array();
    for (const auto& [path, d] : xs) arr.push_back({{"path", path}, {"digest", d}});
    return arr;
  };
  j["inputs"] = files(inputs);
  j["outputs"] = files(outputs);
  j["digest"] = digest();
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << content;
  if (!out) throw ConfigError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace pcast
