#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stefanlab/errors.hpp"
#include "stefanlab/version.hpp"

namespace stefan {

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed = 14695981039346656037ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require_input(f.good(), "fnv1a_file: cannot open '" + path + "'");
  std::uint64_t h = 14695981039346656037ULL;
  char buf[1 << 16];
  while (f.read(buf, sizeof(buf)) || f.gcount() > 0)
    h = fnv1a(buf, static_cast<std::size_t>(f.gcount()), h);
  return h;
}

/// Wall-clock phase timer; phases land in the manifest in call order.
class PhaseTimer {
public:
  void start(const std::string& name) {
    stop();
    name_ = name;
    t0_ = std::chrono::steady_clock::now();
    running_ = true;
  }

  void stop() {
    if (!running_) return;
    const auto dt = std::chrono::steady_clock::now() - t0_;
    phases_.emplace_back(name_, std::chrono::duration<double>(dt).count());
    running_ = false;
  }

  const std::vector<std::pair<std::string, double>>& phases() const { return phases_; }

private:
  std::vector<std::pair<std::string, double>> phases_;
  std::string name_;
  std::chrono::steady_clock::time_point t0_;
  bool running_ = false;
};

/**
 * Run record written next to every command's outputs.  Every file the run
 * produced is listed with its size and FNV-1a checksum; flags collect the
 * run's boolean verdicts (envelope sides, tail monotonicity, reliability).
 */
struct RunManifest {
  struct OutputFile {
    std::string path; ///< relative to the manifest's directory
    std::uint64_t bytes = 0;
    std::uint64_t checksum = 0;

    bool operator==(const OutputFile&) const = default;
  };

  std::string command;
  std::string config; ///< canonical key = value echo, may be empty
  std::string version = version_string;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> timings;
  std::vector<OutputFile> outputs;
  std::map<std::string, bool> flags;
  std::map<std::string, double> scalars; ///< named results (t_star, slope, ...)

  bool operator==(const RunManifest&) const = default;

  /// Checksums the file at dir + "/" + rel and records it.
  void add_output(const std::string& dir, const std::string& rel) {
    const std::string full = dir.empty() ? rel : dir + "/" + rel;
    std::ifstream f(full, std::ios::binary | std::ios::ate);
    require_input(f.good(), "RunManifest: output file missing: '" + full + "'");
    OutputFile of;
    of.path = rel;
    of.bytes = static_cast<std::uint64_t>(f.tellg());
    f.close();
    of.checksum = fnv1a_file(full);
    outputs.push_back(of);
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["config"] = config;
    j["version"] = version;
    j["seed"] = seed;
    j["timings"] = nlohmann::json::array();
    for (const auto& [name, sec] : timings) j["timings"].push_back({{"phase", name}, {"seconds", sec}});
    j["outputs"] = nlohmann::json::array();
    for (const auto& o : outputs)
      j["outputs"].push_back({{"path", o.path}, {"bytes", o.bytes}, {"fnv1a", o.checksum}});
    j["flags"] = flags;
    j["scalars"] = scalars;
    return j;
  }

  static RunManifest from_json(const nlohmann::json& j) {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& t : j.at("timings"))
      m.timings.emplace_back(t.at("phase").get<std::string>(), t.at("seconds").get<double>());
    for (const auto& o : j.at("outputs")) {
      OutputFile of;
      of.path = o.at("path").get<std::string>();
      of.bytes = o.at("bytes").get<std::uint64_t>();
      of.checksum = o.at("fnv1a").get<std::uint64_t>();
      m.outputs.push_back(of);
    }
    m.flags = j.at("flags").get<std::map<std::string, bool>>();
    m.scalars = j.at("scalars").get<std::map<std::string, double>>();
    return m;
  }

  void save(const std::string& path) const {
    std::ofstream f(path);
    require_input(f.good(), "RunManifest: cannot write '" + path + "'");
    f << to_json().dump(2) << "\n";
  }

  static RunManifest load(const std::string& path) {
    std::ifstream f(path);
    require_input(f.good(), "RunManifest: cannot open '" + path + "'");
    nlohmann::json j;
    try {
      f >> j;
    } catch (const nlohmann::json::exception& e) {
      throw input_error("RunManifest: malformed JSON in '" + path + "': " + e.what());
    }
    try {
      return from_json(j);
    } catch (const nlohmann::json::exception& e) {
      throw input_error("RunManifest: missing or mistyped field in '" + path + "': " + e.what());
    }
  }
};

} // namespace stefan
