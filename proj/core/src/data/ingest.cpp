#include "sqf/data/ingest.hpp"

#include <cstdio>
#include <memory>
#include <vector>

#include "sqf/common/rng.hpp"
#include "sqf/data/build.hpp"
#include "sqf/data/rebalance.hpp"
#include "sqf/data/shard.hpp"

namespace sqf::data {

namespace {

std::string shard_name(const std::string& prefix, int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "-%04d.sqd", index);
  return prefix + buf;
}

}  // namespace

IngestStats ingest_pgn(std::istream& pgn,
                       const std::filesystem::path& out_dir,
                       const IngestOptions& opt, uint64_t seed) {
  std::filesystem::create_directories(out_dir);
  IngestStats stats;
  PgnReader reader(pgn);
  Rebalancer balancer(opt.chunk, opt.per_bin);
  Rng root(seed);

  std::vector<std::pair<std::string, uint64_t>> manifest;
  std::unique_ptr<ShardWriter> writer;
  auto roll_shard = [&] {
    if (writer) {
      writer->close();
      manifest.back().second = writer->count();
      writer.reset();
    }
    const std::string name = shard_name(opt.shard_prefix, stats.shards++);
    writer = std::make_unique<ShardWriter>(out_dir / name, opt.history);
    manifest.emplace_back(name, 0);
  };

  const int skip = opt.drop_opening ? 20 : 0;
  uint64_t game_index = 0;
  while (auto game = reader.next()) {
    ++stats.games_parsed;
    const uint64_t index = game_index++;
    if (opt.rebalance && !balancer.admit(*game)) continue;
    GameRecord g = truncate_time_pressure(*game, opt.time_pressure_seconds);
    const int plies = static_cast<int>(g.moves.size());
    if (plies <= skip) continue;
    ++stats.games_admitted;

    Rng rng = root.fork(index);
    const auto states = replay_game(g);
    for (int offset :
         sample_positions(plies - skip, opt.positions_per_game, rng)) {
      const int ply = skip + offset;
      if (!writer || writer->count() == opt.examples_per_shard) roll_shard();
      writer->add(build_example(states, g.moves, ply, opt.history,
                                g.white_elo, g.black_elo, g.result));
      ++stats.examples;
    }
  }

  if (writer) {
    writer->close();
    manifest.back().second = writer->count();
  }
  write_manifest(out_dir / "manifest.tsv", manifest);
  stats.games_rejected = reader.rejected();
  stats.reject_reasons = reader.reject_reasons();
  return stats;
}

}  // namespace sqf::data
