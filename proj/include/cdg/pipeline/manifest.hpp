#pragma once

// Run manifest: config echo, component descriptions, timestamps and SHA-256
// digests of every input and output. One manifest.json per output directory;
// each command replaces its own entry and leaves the others.

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <string>
#include <vector>

#include "cdg/pipeline/config.hpp"

namespace cdg::pipeline {

inline constexpr const char* kToolName = "cdg";
inline constexpr const char* kVersion = "1.0.0";

inline std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string() + " for digest");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha256: digest init failed");
  }
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline Json file_entry(const fs::path& path) {
  Json j;
  j["path"] = path.generic_string();
  j["bytes"] = fs::file_size(path);
  j["sha256"] = sha256_file(path);
  return j;
}

struct CommandRecord {
  std::string command;
  std::string started;
  std::string finished;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  std::vector<std::string> warnings;
  int exit_code = 0;
};

inline Json components_json(const RunConfig& c) {
  Json j;
  j["library"] = kVersion;
  j["garch"] = "GARCH(1,1), " + innovation_id(c.garch_innovation) + " innovations";
  j["dcc"] = "DCC(1,1), correlation targeting";
  j["copula_families"] = Json::array();
  for (auto f : c.families) j["copula_families"].push_back(std::string(copula::family_id(f)));
  j["marginal_transform"] = std::string(risk::transform_id(c.marginal_transform));
  j["rng"] = "mt19937_64, stream-split by (seed, stream id)";
  return j;
}

inline fs::path manifest_path(const RunConfig& c) { return c.out_dir / "manifest.json"; }

inline void update_manifest(const RunConfig& c, const CommandRecord& rec) {
  const fs::path path = manifest_path(c);
  Json m;
  if (fs::exists(path)) {
    std::ifstream in(path);
    try {
      m = Json::parse(in);
    } catch (const Json::parse_error&) {
      m = Json();
    }
    if (!m.is_object()) m = Json();
  }
  m["tool"] = kToolName;
  m["version"] = kVersion;
  m["config"] = config_to_json(c);
  m["components"] = components_json(c);
  if (!m.contains("commands") || !m["commands"].is_object()) m["commands"] = Json::object();
  Json e;
  e["started"] = rec.started;
  e["finished"] = rec.finished;
  e["exit_code"] = rec.exit_code;
  e["inputs"] = Json::array();
  for (const auto& p : rec.inputs) e["inputs"].push_back(file_entry(p));
  e["outputs"] = Json::array();
  for (const auto& p : rec.outputs) e["outputs"].push_back(file_entry(p));
  e["warnings"] = rec.warnings;
  m["commands"][rec.command] = std::move(e);
  fs::create_directories(c.out_dir);
  std::ofstream out(path, std::ios::binary);
  out << m.dump(2) << '\n';
  if (!out) throw DataError("cannot write " + path.string());
}

}  // namespace cdg::pipeline
