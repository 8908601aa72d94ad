#include "qa/manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <memory>
#include <vector>

#include "qa/binary_io.hpp"
#include "qa/error.hpp"

namespace qa {
namespace fs = std::filesystem;

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw Error("io", "sha256 unavailable");
    }
  }
  void update(std::string_view data) { EVP_DigestUpdate(ctx_.get(), data.data(), data.size()); }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md, &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += kHex[md[i] >> 4];
      out += kHex[md[i] & 0xF];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data);
  return h.hex();
}

std::string path_sha256(const std::string& path) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(path)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    Sha256 h;
    for (const auto& f : files) {
      const auto rel = fs::relative(f, path).generic_string();
      h.update(rel);
      h.update(std::string_view("\0", 1));
      h.update(sha256_hex(io::read_file(f.string())));
    }
    return h.hex();
  }
  return sha256_hex(io::read_file(path));
}

nlohmann::json Manifest::to_json() const {
  return {{"tool", "qa"},
          {"version", kToolVersion},
          {"command", command},
          {"config", config},
          {"config_sha256", sha256_hex(config.dump())},
          {"seeds", seeds},
          {"inputs", inputs},
          {"outputs", outputs}};
}

Manifest Manifest::from_json(const nlohmann::json& j) {
  try {
    Manifest m;
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config");
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error("format", std::string("manifest: ") + e.what());
  }
}

void save_manifest(const Manifest& m, const std::string& path) {
  io::write_file(path, m.to_json().dump(2) + "\n");
}

Manifest load_manifest(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("format", path + ": " + e.what());
  }
  return Manifest::from_json(j);
}

}  // namespace qa
