#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqf/data/example.hpp"

namespace sqf::data {

// Example shards: "SQFDATA1" magic, format version, history length, record
// count, then one length-prefixed binary record per example. Every example
// in a shard shares the same history length.

class ShardWriter {
 public:
  ShardWriter(const std::filesystem::path& path, int history);
  ~ShardWriter();

  ShardWriter(const ShardWriter&) = delete;
  ShardWriter& operator=(const ShardWriter&) = delete;

  void add(const TrainingExample& ex);
  uint64_t count() const { return count_; }

  // Patches the record count into the header; add() is invalid afterwards.
  void close();

 private:
  std::ofstream out_;
  int history_;
  uint64_t count_ = 0;
  bool open_ = true;
};

class ShardReader {
 public:
  explicit ShardReader(const std::filesystem::path& path);

  int history() const { return history_; }
  uint64_t count() const { return count_; }

  std::optional<TrainingExample> next();

 private:
  std::ifstream in_;
  int history_ = 0;
  uint64_t count_ = 0;
  uint64_t read_ = 0;
};

std::vector<TrainingExample> read_shard(const std::filesystem::path& path);

// Manifest: one "<path>\t<count>" row per shard, paths relative to the
// manifest's directory.
void write_manifest(
    const std::filesystem::path& manifest,
    const std::vector<std::pair<std::string, uint64_t>>& shards);
std::vector<std::pair<std::string, uint64_t>> read_manifest(
    const std::filesystem::path& manifest);

}  // namespace sqf::data
