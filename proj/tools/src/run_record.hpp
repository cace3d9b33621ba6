#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mixcheck::cli {

inline constexpr int kManifestVersion = 1;
inline constexpr const char* kSeedEnvVar = "MIXCHECK_SEED";

struct SeedChoice {
  std::uint64_t value = 0;
  std::string source;  // "flag", "env" or "default"
};

/// --seed when given, else $MIXCHECK_SEED, else 1.
SeedChoice resolve_seed(const std::string& flag_value);

struct FileDigest {
  std::string path;
  std::string fnv1a;
  std::size_t bytes = 0;
};

std::string read_file(const std::string& path);

/// Everything needed to redo a run: the canonical argument list, the seed,
/// digests of the inputs read and of the outputs written.
class RunRecord {
 public:
  explicit RunRecord(std::string command) : command_(std::move(command)) {}

  /// Records "--flag value". Options that only say where to write or how
  /// many threads to use are kept out of the config hash.
  void option(const std::string& flag, const std::string& value, bool hashed = true);
  void seed(const SeedChoice& seed);

  /// Reads and digests an input file; returns its contents.
  std::string input(const std::string& path);

  /// Queues an output. Nothing touches the disk until commit().
  void output(const std::string& path, std::string content);

  /// Writes queued outputs in order, then the manifest.
  void commit(const std::string& manifest_path);

  const std::string& command() const noexcept { return command_; }
  std::vector<std::string> argv() const;
  std::string config_hash() const;
  std::uint64_t seed_value() const noexcept { return seed_.value; }

 private:
  struct Option {
    std::string flag;
    std::string value;
    bool hashed;
  };

  std::string command_;
  std::vector<Option> options_;
  SeedChoice seed_;
  std::vector<FileDigest> inputs_;
  std::vector<std::pair<std::string, std::string>> outputs_;
};

struct Manifest {
  std::string command;
  std::vector<std::string> argv;
  std::string config_hash;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
};

Manifest read_manifest(const std::string& path);

}  // namespace mixcheck::cli
