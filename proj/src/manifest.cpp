#include "mirs/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mirs {

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto ltrim = line.find_first_not_of(" \t\r");
    if (ltrim == std::string::npos) continue;
    auto rtrim = line.find_last_not_of(" \t\r");
    line = line.substr(ltrim, rtrim - ltrim + 1);
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    auto key = line.substr(0, eq);
    auto val = line.substr(eq + 1);
    auto trim = [](std::string s) {
      auto a = s.find_first_not_of(" \t");
      auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    key = trim(key);
    val = trim(val);
    if (kv.count(key)) throw ConfigError("duplicate key " + key);
    kv[key] = val;
  }
  return kv;
}

namespace {

Rational parse_rational_str(const std::string& s) {
  auto slash = s.find('/');
  if (slash != std::string::npos)
    return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
  // decimal like 0.45 parsed exactly
  auto dot = s.find('.');
  if (dot == std::string::npos) return Rational(std::stoll(s));
  std::string digits = s.substr(0, dot) + s.substr(dot + 1);
  long long den = 1;
  for (std::size_t i = 0; i < s.size() - dot - 1; ++i) den *= 10;
  return Rational(std::stoll(digits), den);
}

}  // namespace

SimConfig sim_config_from_kv(const std::map<std::string, std::string>& kv) {
  SimConfig cfg;
  for (const auto& [k, v] : kv) {
    if (k == "alpha") cfg.algebra.alpha = parse_rational_str(v);
    else if (k == "a0") cfg.algebra.a0 = std::stod(v);
    else if (k == "n1") cfg.n1 = std::stoi(v);
    else if (k == "n2") cfg.n2 = std::stoi(v);
    else if (k == "h1") cfg.h1 = std::stod(v);
    else if (k == "h2") cfg.h2 = std::stod(v);
    else if (k == "tau") cfg.tau = std::stod(v);
    else if (k == "spectrum") {
      if (v == "power-law") cfg.spectrum = NoiseSpectrum::PowerLaw;
      else if (v == "mollified-white") cfg.spectrum = NoiseSpectrum::MollifiedWhite;
      else throw ConfigError("unknown spectrum " + v);
    } else if (k == "ircutoff") cfg.ircutoff = (v == "1" || v == "true");
    else if (k == "seed") cfg.seed = std::stoull(v);
    else if (k == "samples") cfg.samples = std::stoi(v);
    else if (k == "samples_pass2") cfg.samples_pass2 = std::stoi(v);
    else if (k == "basepoint_i1") cfg.basepoint_i1 = std::stoi(v);
    else if (k == "basepoint_i2") cfg.basepoint_i2 = std::stoi(v);
    else if (k == "t0_smooth") cfg.t0_smooth = std::stod(v);
    else if (k == "quad_ratio") cfg.quad_ratio = std::stod(v);
    else if (k == "jobs") cfg.jobs = std::stoi(v);
    else if (k == "targets") {
      std::stringstream ss(v);
      std::string tok;
      while (std::getline(ss, tok, ',')) cfg.targets.push_back(MultiIndex::parse(tok));
    } else {
      throw ConfigError("unknown config key: " + k);
    }
  }
  cfg.validate();
  return cfg;
}

std::string sim_config_json(const SimConfig& cfg) {
  std::ostringstream os;
  os << "{";
  os << "\"alpha\": \"" << cfg.algebra.alpha.str() << "\"";
  os << ", \"a0\": " << cfg.algebra.a0;
  os << ", \"n1\": " << cfg.n1 << ", \"n2\": " << cfg.n2;
  os << ", \"h1\": " << cfg.h1 << ", \"h2\": " << cfg.h2;
  os << ", \"tau\": " << cfg.tau_eff();
  os << ", \"spectrum\": \""
     << (cfg.spectrum == NoiseSpectrum::PowerLaw ? "power-law" : "mollified-white") << "\"";
  os << ", \"ircutoff\": " << (cfg.ircutoff ? "true" : "false");
  os << ", \"seed\": " << cfg.seed;
  os << ", \"samples\": " << cfg.samples;
  os << ", \"samples_pass2\": " << cfg.samples_pass2;
  os << ", \"basepoint\": [" << cfg.basepoint().i1 << ", " << cfg.basepoint().i2 << "]";
  os << ", \"jobs\": " << cfg.jobs;
  if (!cfg.targets.empty()) {
    os << ", \"targets\": [";
    for (std::size_t i = 0; i < cfg.targets.size(); ++i)
      os << (i ? ", " : "") << "\"" << cfg.targets[i].str() << "\"";
    os << "]";
  }
  os << "}";
  return os.str();
}

std::string RunManifest::to_json() const {
  std::ostringstream os;
  os << "{\n";
  os << "  \"command\": \"" << command << "\",\n";
  os << "  \"config\": " << config_json << ",\n";
  os << "  \"seed\": " << seed << ",\n";
  os << "  \"version\": \"" << version << "\",\n";
  os << "  \"started_utc\": \"" << started_utc << "\",\n";
  os << "  \"wall_seconds\": " << wall_seconds << ",\n";
  os << "  \"manifest_hash\": \"" << std::hex << hash() << std::dec << "\"\n";
  os << "}\n";
  return os.str();
}

std::uint64_t RunManifest::hash() const {
  std::string stable = command + "|" + config_json + "|" + std::to_string(seed) + "|" + version;
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : stable) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp);
    f << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " -> " + path);
}

std::string tool_version() { return "mirs 0.1.0"; }

}  // namespace mirs
