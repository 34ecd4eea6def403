#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>

#include "sqf/data/pgn.hpp"

namespace sqf::data {

struct IngestOptions {
  int history = 7;
  int positions_per_game = 32;
  int time_pressure_seconds = 30;
  // Evaluation-set rule: additionally skip the first 10 moves (20 plies).
  // Training keeps them.
  bool drop_opening = false;
  bool rebalance = true;
  int chunk = 20000;
  int per_bin = 10;
  uint64_t examples_per_shard = 1 << 16;
  std::string shard_prefix = "examples";
};

struct IngestStats {
  int games_parsed = 0;    // games that replayed cleanly
  int games_rejected = 0;  // parser rejects, by reason
  std::map<std::string, int> reject_reasons;
  int games_admitted = 0;  // survived rebalancing with plies to sample
  uint64_t examples = 0;
  int shards = 0;

  bool operator==(const IngestStats&) const = default;
};

// PGN stream -> rebalance -> time-pressure truncation -> position sampling
// -> example shards plus a "manifest.tsv" in out_dir. Deterministic for a
// fixed seed: each admitted game samples from its own forked stream.
IngestStats ingest_pgn(std::istream& pgn,
                       const std::filesystem::path& out_dir,
                       const IngestOptions& opt, uint64_t seed);

}  // namespace sqf::data
