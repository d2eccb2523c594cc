#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace anonsim::cli {

inline constexpr const char* kManifestSchema = "anonsim.manifest/1";

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

struct Artifact {
  std::string path;  // absolute for inputs, relative to the output location for outputs
  std::string sha256;
};

// Everything needed to repeat a run: the canonical command line (without the
// output location), the parsed configuration, and hashes of inputs and outputs.
struct RunManifest {
  std::string tool_version;
  std::vector<std::string> command;
  std::string output_flag;  // "--out" or "--out-dir"
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::optional<std::uint64_t> seed;
  std::vector<Artifact> inputs;
  std::vector<Artifact> outputs;

  nlohmann::ordered_json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

}  // namespace anonsim::cli
