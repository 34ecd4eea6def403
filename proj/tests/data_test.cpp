#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "sqf/chess/position.hpp"
#include "sqf/common/error.hpp"
#include "sqf/common/rng.hpp"
#include "sqf/data/build.hpp"
#include "sqf/data/ingest.hpp"
#include "sqf/data/pgn.hpp"
#include "sqf/data/rebalance.hpp"
#include "sqf/data/shard.hpp"

using namespace sqf;
using namespace sqf::data;

namespace {

const char* kTwoMovePgn =
    "[Event \"Rated Blitz game\"]\n"
    "[Result \"1-0\"]\n"
    "[WhiteElo \"1523\"]\n"
    "[BlackElo \"1498\"]\n"
    "[TimeControl \"300+0\"]\n"
    "\n"
    "1. e4 e5 1-0\n";

GameRecord make_game(int white_elo, int black_elo,
                     GameResult result = GameResult::WhiteWin) {
  GameRecord g;
  g.white_elo = white_elo;
  g.black_elo = black_elo;
  g.result = result;
  g.moves = {chess::Move::parse_uci("e2e4"), chess::Move::parse_uci("e7e5"),
             chess::Move::parse_uci("g1f3"), chess::Move::parse_uci("b8c6")};
  return g;
}

}  // namespace

TEST_CASE("pgn: minimal game") {
  std::istringstream in(kTwoMovePgn);
  auto games = parse_pgn(in);
  REQUIRE(games.size() == 1);
  const GameRecord& g = games[0];
  CHECK(g.moves.size() == 2);
  CHECK(g.moves[0] == chess::Move::parse_uci("e2e4"));
  CHECK(g.moves[1] == chess::Move::parse_uci("e7e5"));
  CHECK(g.white_elo == 1523);
  CHECK(g.black_elo == 1498);
  CHECK(g.result == GameResult::WhiteWin);
  CHECK(g.time_control == "300+0");
  CHECK(g.clocks.empty());
}

TEST_CASE("pgn: clock comments populate seconds") {
  std::istringstream in(
      "[Result \"0-1\"]\n[WhiteElo \"900\"]\n[BlackElo \"905\"]\n\n"
      "1. e4 { [%eval 0.3] [%clk 0:02:58] } 1... e5 { [%clk 0:03:00] } "
      "2. Nf3 { [%clk 0:02:40.5] } 2... Nc6 { [%clk 0:02:59] } 0-1\n");
  auto games = parse_pgn(in);
  REQUIRE(games.size() == 1);
  CHECK(games[0].clocks == std::vector<int>{178, 180, 160, 179});
}

TEST_CASE("pgn: clock string conversion") {
  CHECK(parse_clock("0:02:58") == 178);
  CHECK(parse_clock("1:00:00") == 3600);
  CHECK(parse_clock("0:00:59.9") == 59);
  CHECK(parse_clock("5:00") == 300);
  CHECK_THROWS_AS(parse_clock("abc"), ParseError);
  CHECK_THROWS_AS(parse_clock("12"), ParseError);
}

TEST_CASE("pgn: rejects are skipped and counted by reason") {
  std::istringstream in(
      // Illegal move.
      "[Result \"1-0\"]\n[WhiteElo \"1000\"]\n[BlackElo \"1000\"]\n\n"
      "1. e5 e5 1-0\n\n"
      // No rating.
      "[Result \"1-0\"]\n[BlackElo \"1000\"]\n\n1. e4 1-0\n\n"
      // Unfinished.
      "[Result \"*\"]\n[WhiteElo \"1000\"]\n[BlackElo \"1000\"]\n\n1. e4 *\n\n"
      // Fine.
      "[Result \"1/2-1/2\"]\n[WhiteElo \"2000\"]\n[BlackElo \"2100\"]\n\n"
      "1. Nf3 Nf6 1/2-1/2\n");
  PgnReader reader(in);
  std::vector<GameRecord> ok;
  while (auto g = reader.next()) ok.push_back(*g);
  REQUIRE(ok.size() == 1);
  CHECK(ok[0].result == GameResult::Draw);
  CHECK(ok[0].moves.size() == 2);
  CHECK(reader.rejected() == 3);
  CHECK(reader.reject_reasons().at("replay failure") == 1);
  CHECK(reader.reject_reasons().at("missing rating") == 1);
  CHECK(reader.reject_reasons().at("no result") == 1);
}

TEST_CASE("pgn: annotations, variations, and glued numbers") {
  std::istringstream in(
      "[Result \"1-0\"]\n[WhiteElo \"1800\"]\n[BlackElo \"1790\"]\n\n"
      "1.e4! e5?? $14 (1... c5 2. Nf3 {a sideline}) 2. Nf3 ; line comment\n"
      "2... Nc6 3. Bb5 a6 1-0\n");
  auto games = parse_pgn(in);
  REQUIRE(games.size() == 1);
  CHECK(games[0].moves.size() == 6);
  CHECK(games[0].moves[4] == chess::Move::parse_uci("f1b5"));
}

TEST_CASE("pgn: castling and promotion replay") {
  std::istringstream in(
      "[Result \"1-0\"]\n[WhiteElo \"1500\"]\n[BlackElo \"1500\"]\n\n"
      "1. e4 e5 2. Nf3 Nc6 3. Bc4 Bc5 4. O-O Nf6 1-0\n");
  auto games = parse_pgn(in);
  REQUIRE(games.size() == 1);
  CHECK(games[0].moves[6] == chess::Move::parse_uci("e1g1"));
}

TEST_CASE("truncate_time_pressure") {
  GameRecord g = make_game(1500, 1500);

  SUBCASE("all clocks comfortable: unchanged") {
    g.clocks = {60, 61, 45, 44};
    CHECK(truncate_time_pressure(g) == g);
  }

  SUBCASE("cut before the first sub-threshold ply") {
    g.clocks = {60, 45, 29, 50};
    GameRecord t = truncate_time_pressure(g);
    CHECK(t.moves.size() == 2);
    CHECK(t.clocks == std::vector<int>{60, 45});
  }

  SUBCASE("threshold zero is vacuous") {
    g.clocks = {3, 2, 1, 0};
    CHECK(truncate_time_pressure(g, 0) == g);
  }

  SUBCASE("no clocks: identity") {
    CHECK(truncate_time_pressure(g) == g);
  }

  SUBCASE("boundary exactly at threshold stays") {
    g.clocks = {30, 30, 30, 30};
    CHECK(truncate_time_pressure(g) == g);
  }
}

TEST_CASE("rating bins") {
  CHECK(rating_bin(599.5) == 0);
  CHECK(rating_bin(100) == 0);
  CHECK(rating_bin(600) == 1);
  CHECK(rating_bin(699.5) == 1);
  CHECK(rating_bin(700) == 2);
  CHECK(rating_bin(2599.5) == 20);
  CHECK(rating_bin(2600) == 21);
  CHECK(rating_bin(2700) == 21);
  CHECK(kRatingBins == 22);
}

TEST_CASE("rebalance: uniform coverage fills every bin") {
  // 220 games, ten per bin, delivered interleaved.
  std::vector<GameRecord> games;
  for (int round = 0; round < 10; ++round)
    for (int bin = 0; bin < 22; ++bin) {
      const int elo = bin == 0 ? 500 : bin == 21 ? 2700 : 550 + 100 * bin;
      games.push_back(make_game(elo, elo));
    }
  auto out = rebalance(games);
  CHECK(out.size() == 220);
  std::array<int, kRatingBins> counts{};
  for (const auto& g : out) ++counts[rating_bin(average_elo(g))];
  for (int c : counts) CHECK(c == 10);
}

TEST_CASE("rebalance: single-bin stream caps at per_bin per chunk") {
  std::vector<GameRecord> games(300, make_game(1500, 1500));
  CHECK(rebalance(games).size() == 10);
  // Two chunks of 150 admit ten each.
  CHECK(rebalance(games, 150).size() == 20);
}

TEST_CASE("rebalance: average decides the bin") {
  Rebalancer r(100, 1);
  // 1550 average from asymmetric ratings.
  CHECK(r.admit(make_game(1000, 2100)));
  CHECK_FALSE(r.admit(make_game(1500, 1600)));
  CHECK(r.admit(make_game(2700, 2700)));      // overflow bin
  CHECK_FALSE(r.admit(make_game(3100, 2601)));
  CHECK(r.admit(make_game(500, 500)));        // underflow bin
}

TEST_CASE("rebalance: per-bin counts across a full chunk differ by at most per_bin") {
  Rng rng(17);
  std::vector<GameRecord> games;
  for (int i = 0; i < 4000; ++i) {
    const int elo = 400 + static_cast<int>(rng.below(2500));
    games.push_back(make_game(elo, elo + static_cast<int>(rng.below(100))));
  }
  const int chunk = 2000, per_bin = 6;
  auto out = rebalance(games, chunk, per_bin);
  std::array<int, kRatingBins> counts{};
  for (const auto& g : out) ++counts[rating_bin(average_elo(g))];
  // Two full chunks: no bin may exceed 2 * per_bin overall.
  for (int c : counts) CHECK(c <= 2 * per_bin);
}

TEST_CASE("interval capper") {
  IntervalCapper cap(2);
  CHECK_FALSE(cap.admit(make_game(500, 500)));    // below range
  CHECK_FALSE(cap.admit(make_game(2950, 2950)));  // above range
  CHECK(cap.admit(make_game(600, 600)));
  CHECK(cap.admit(make_game(649, 649)));          // same bucket as 600
  CHECK_FALSE(cap.admit(make_game(610, 610)));    // bucket full
  CHECK(cap.admit(make_game(650, 650)));          // next bucket
  CHECK(cap.bucket_counts().at(600) == 2);
  CHECK(cap.bucket_counts().at(700) == 1);
}

TEST_CASE("sample_positions") {
  Rng rng(5);
  GameRecord g = make_game(1500, 1500);

  SUBCASE("short game takes every ply") {
    auto plies = sample_positions(g, 32, rng);
    CHECK(plies == std::vector<int>{0, 1, 2, 3});
  }

  SUBCASE("long game draws distinct plies") {
    auto plies = sample_positions(100, 32, rng);
    CHECK(plies.size() == 32);
    std::set<int> seen(plies.begin(), plies.end());
    CHECK(seen.size() == 32);
    CHECK(*seen.begin() >= 0);
    CHECK(*seen.rbegin() < 100);
    CHECK(std::is_sorted(plies.begin(), plies.end()));
  }

  SUBCASE("fixed seed reproduces") {
    Rng a(9), b(9);
    CHECK(sample_positions(500, 32, a) == sample_positions(500, 32, b));
  }

  SUBCASE("coverage is uniform-ish over many draws") {
    std::array<int, 10> hits{};
    for (int rep = 0; rep < 2000; ++rep)
      for (int p : sample_positions(10, 3, rng)) ++hits[p];
    for (int h : hits) {
      CHECK(h > 450);
      CHECK(h < 750);
    }
  }
}

TEST_CASE("build_example from a game record") {
  GameRecord g = make_game(1650, 1400, GameResult::WhiteWin);

  SUBCASE("ply 0 with n=7 repeats the start board in all slots") {
    auto ex = build_example(g, 0, 7);
    REQUIRE(ex.boards.size() == 8);
    for (int i = 1; i < 8; ++i) CHECK(ex.boards[i] == ex.boards[0]);
    CHECK(ex.ply == 0);
    CHECK_FALSE(ex.black_to_move);
  }

  SUBCASE("mover perspective outcome") {
    CHECK(build_example(g, 0, 1).target_outcome == Outcome::Win);
    CHECK(build_example(g, 1, 1).target_outcome == Outcome::Loss);
    CHECK(build_example(g, 1, 1).active_rating == 1400);
    CHECK(build_example(g, 1, 1).opponent_rating == 1650);
  }

  SUBCASE("every emitted example replays") {
    const auto states = replay_game(g);
    for (int ply = 0; ply < static_cast<int>(g.moves.size()); ++ply) {
      auto ex = build_example(g, ply, 3);
      const chess::Move played =
          chess::from_canonical_move(states[ply], ex.target_move);
      const auto legal = states[ply].legal_moves();
      CHECK(std::find(legal.begin(), legal.end(), played) != legal.end());
      CHECK(ex.legal.size() == legal.size());
    }
  }
}

TEST_CASE("shard round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "sqf_shard_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "roundtrip.sqd";

  GameRecord g = make_game(1650, 1400);
  std::vector<TrainingExample> in;
  for (int ply = 0; ply < 4; ++ply) in.push_back(build_example(g, ply, 2));
  in[3].soft_target.assign(in[3].legal.size(),
                           1.0f / static_cast<float>(in[3].legal.size()));

  {
    ShardWriter w(path, 2);
    for (const auto& ex : in) w.add(ex);
    CHECK(w.count() == 4);
  }

  ShardReader r(path);
  CHECK(r.history() == 2);
  CHECK(r.count() == 4);
  auto out = read_shard(path);
  REQUIRE(out.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(out[i] == in[i]);

  SUBCASE("history mismatch is rejected") {
    ShardWriter w(dir / "bad.sqd", 5);
    CHECK_THROWS_AS(w.add(in[0]), ShapeError);
  }
}

TEST_CASE("ingest pipeline writes shards and manifest") {
  // Three games; middle one unparseable.
  std::string pgn;
  pgn +=
      "[Result \"1-0\"]\n[WhiteElo \"1523\"]\n[BlackElo \"1498\"]\n\n"
      "1. e4 e5 2. Nf3 Nc6 3. Bb5 a6 1-0\n\n";
  pgn += "[Result \"1-0\"]\n[WhiteElo \"xx\"]\n[BlackElo \"1000\"]\n\n1. e4 1-0\n\n";
  pgn +=
      "[Result \"0-1\"]\n[WhiteElo \"2210\"]\n[BlackElo \"2195\"]\n\n"
      "1. d4 d5 2. c4 e6 0-1\n";

  const auto dir = std::filesystem::temp_directory_path() / "sqf_ingest_test";
  std::filesystem::remove_all(dir);

  IngestOptions opt;
  opt.history = 2;
  opt.examples_per_shard = 6;  // force a shard roll
  std::istringstream in(pgn);
  auto stats = ingest_pgn(in, dir, opt, 77);

  CHECK(stats.games_parsed == 2);
  CHECK(stats.games_rejected == 1);
  CHECK(stats.reject_reasons.at("missing rating") == 1);
  CHECK(stats.games_admitted == 2);
  CHECK(stats.examples == 10);  // 6 + 4 plies, all sampled
  CHECK(stats.shards == 2);

  auto manifest = read_manifest(dir / "manifest.tsv");
  REQUIRE(manifest.size() == 2);
  uint64_t total = 0;
  int with_history = 0;
  for (const auto& [name, count] : manifest) {
    total += count;
    ShardReader r(dir / name);
    CHECK(r.count() == count);
    if (r.history() == 2) ++with_history;
  }
  CHECK(total == 10);
  CHECK(with_history == 2);

  SUBCASE("deterministic for a fixed seed") {
    const auto dir2 = std::filesystem::temp_directory_path() / "sqf_ingest_b";
    std::filesystem::remove_all(dir2);
    std::istringstream in2(pgn);
    auto stats2 = ingest_pgn(in2, dir2, opt, 77);
    CHECK(stats2 == stats);
    auto a = read_shard(dir / manifest[0].first);
    auto b = read_shard(dir2 / manifest[0].first);
    CHECK(a == b);
  }

  SUBCASE("drop_opening removes the first twenty plies") {
    const auto dir3 = std::filesystem::temp_directory_path() / "sqf_ingest_c";
    std::filesystem::remove_all(dir3);
    IngestOptions strict = opt;
    strict.drop_opening = true;
    std::istringstream in3(pgn);
    auto stats3 = ingest_pgn(in3, dir3, strict, 77);
    CHECK(stats3.examples == 0);  // both games are shorter than 20 plies
    CHECK(stats3.games_admitted == 0);
  }
}
