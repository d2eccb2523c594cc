#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <stdexcept>

#include "anonsim/core.hpp"

namespace anonsim::cli {

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("sha256 unavailable");
    }
  }

  void update(const char* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md.data(), &len);
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 15];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = kManifestSchema;
  j["tool_version"] = tool_version;
  j["command"] = command;
  j["output_flag"] = output_flag;
  j["config"] = config;
  j["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json();
  auto artifacts = [](const std::vector<Artifact>& list) {
    auto a = nlohmann::ordered_json::array();
    for (const auto& x : list) a.push_back({{"path", x.path}, {"sha256", x.sha256}});
    return a;
  };
  j["inputs"] = artifacts(inputs);
  j["outputs"] = artifacts(outputs);
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != kManifestSchema) throw DataError("not an anonsim manifest");
  RunManifest m;
  m.tool_version = j.at("tool_version").get<std::string>();
  m.command = j.at("command").get<std::vector<std::string>>();
  m.output_flag = j.at("output_flag").get<std::string>();
  m.config = j.at("config");
  if (!j.at("seed").is_null()) m.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& a : j.at("inputs")) m.inputs.push_back({a.at("path"), a.at("sha256")});
  for (const auto& a : j.at("outputs")) m.outputs.push_back({a.at("path"), a.at("sha256")});
  return m;
}

}  // namespace anonsim::cli
