#include "run_record.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mixcheck/error.hpp"
#include "mixcheck/reports.hpp"

namespace mixcheck::cli {

namespace {

std::uint64_t parse_seed(const std::string& text, const std::string& where) {
  std::uint64_t v = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc{} || ptr != last) {
    throw ValidationError(where + ": seed must be a non-negative integer, got '" + text + "'");
  }
  return v;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << content;
  out.close();
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

FileDigest digest(const std::string& path, const std::string& content) {
  return {path, fnv1a_hex(content), content.size()};
}

nlohmann::ordered_json digests_json(const std::vector<FileDigest>& files) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& f : files) {
    arr.push_back({{"path", f.path}, {"fnv1a", f.fnv1a}, {"bytes", f.bytes}});
  }
  return arr;
}

}  // namespace

SeedChoice resolve_seed(const std::string& flag_value) {
  if (!flag_value.empty()) return {parse_seed(flag_value, "--seed"), "flag"};
  if (const char* env = std::getenv(kSeedEnvVar); env && *env) {
    return {parse_seed(env, kSeedEnvVar), "env"};
  }
  return {1, "default"};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void RunRecord::option(const std::string& flag, const std::string& value, bool hashed) {
  options_.push_back({flag, value, hashed});
}

void RunRecord::seed(const SeedChoice& seed) {
  seed_ = seed;
  option("--seed", std::to_string(seed.value));
}

std::string RunRecord::input(const std::string& path) {
  auto text = read_file(path);
  inputs_.push_back(digest(path, text));
  return text;
}

void RunRecord::output(const std::string& path, std::string content) {
  outputs_.emplace_back(path, std::move(content));
}

std::vector<std::string> RunRecord::argv() const {
  std::vector<std::string> out{command_};
  for (const auto& o : options_) {
    out.push_back(o.flag);
    out.push_back(o.value);
  }
  return out;
}

std::string RunRecord::config_hash() const {
  std::string text = command_ + "\n";
  for (const auto& o : options_) {
    if (o.hashed) text += o.flag + "=" + o.value + "\n";
  }
  for (const auto& in : inputs_) text += "input=" + in.fnv1a + "\n";
  return fnv1a_hex(text);
}

void RunRecord::commit(const std::string& manifest_path) {
  std::vector<FileDigest> written;
  for (const auto& [path, content] : outputs_) {
    write_file(path, content);
    written.push_back(digest(path, content));
  }

  nlohmann::ordered_json j;
  j["version"] = kManifestVersion;
  j["kind"] = "manifest";
  j["tool"] = "mixcheck";
  j["command"] = command_;
  j["argv"] = argv();
  auto config = nlohmann::ordered_json::object();
  for (const auto& o : options_) {
    const auto key = o.flag.substr(2);
    if (config.contains(key)) {
      if (!config[key].is_array()) config[key] = nlohmann::ordered_json::array({config[key]});
      config[key].push_back(o.value);
    } else {
      config[key] = o.value;
    }
  }
  j["config"] = std::move(config);
  // Deterministic commands draw no random numbers and record no seed.
  if (seed_.source.empty()) {
    j["seed"] = nullptr;
    j["seed_source"] = "none";
  } else {
    j["seed"] = seed_.value;
    j["seed_source"] = seed_.source;
  }
  j["config_hash"] = config_hash();
  j["inputs"] = digests_json(inputs_);
  j["outputs"] = digests_json(written);
  write_file(manifest_path, j.dump(2) + "\n");
}

Manifest read_manifest(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("manifest '" + path + "' is not valid JSON: " + e.what());
  }
  try {
    if (j.at("kind").get<std::string>() != "manifest") {
      throw ValidationError("'" + path + "' is not a mixcheck manifest");
    }
    if (j.at("version").get<int>() != kManifestVersion) {
      throw ValidationError("unsupported manifest version in '" + path + "'");
    }
    Manifest m;
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.config_hash = j.at("config_hash").get<std::string>();
    auto files = [](const nlohmann::json& arr) {
      std::vector<FileDigest> out;
      for (const auto& f : arr) {
        out.push_back({f.at("path").get<std::string>(), f.at("fnv1a").get<std::string>(),
                       f.at("bytes").get<std::size_t>()});
      }
      return out;
    };
    m.inputs = files(j.at("inputs"));
    m.outputs = files(j.at("outputs"));
    if (m.argv.empty() || m.argv.front() != m.command) {
      throw ValidationError("manifest argv does not start with its command");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed manifest '" + path + "': " + e.what());
  }
}

}  // namespace mixcheck::cli
