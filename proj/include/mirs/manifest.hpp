#pragma once

#include <map>
#include <string>

#include "mirs/model.hpp"

namespace mirs {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// flat key=value configuration file; unknown keys are hard errors
std::map<std::string, std::string> parse_config_file(const std::string& path);

/// build a SimConfig from key=value pairs (defaults where absent)
SimConfig sim_config_from_kv(const std::map<std::string, std::string>& kv);

/// canonical JSON snapshot of a SimConfig
std::string sim_config_json(const SimConfig& cfg);

/// run manifest: command, config snapshot, seed, version, wall clock; the
/// manifest hash ties result artifacts to the run that produced them
struct RunManifest {
  std::string command;
  std::string config_json;
  std::uint64_t seed = 0;
  std::string version;
  std::string started_utc;
  double wall_seconds = 0;

  std::string to_json() const;
  std::uint64_t hash() const;  // FNV-1a over the stable fields
};

/// atomic write (temp file + rename)
void write_file_atomic(const std::string& path, const std::string& content);

std::string tool_version();

}  // namespace mirs
