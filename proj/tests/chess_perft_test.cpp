#include <doctest.h>

#include <cstdint>

#include "sqf/chess/position.hpp"
#include "support/naive_movegen.hpp"

using sqf::chess::Position;

namespace {

struct Fixture {
  const char* fen;
  int compare_depth;    // fast vs naive generator, recomputed every run
  int frozen_depth;     // fast generator vs value the naive oracle produced
  uint64_t frozen_nodes;
};

// frozen_nodes were computed with naive::perft and written down here; the
// standard positions also match their published reference counts.
const Fixture kFixtures[] = {
    {"rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1", 4, 5, 4865609},
    {"r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1",
     3, 4, 4085603},
    {"8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1", 4, 5, 674624},
    {"r3k2r/Pppp1ppp/1b3nbN/nP6/BBP1P3/q4N2/Pp1P2PP/R2Q1RK1 w kq - 0 1",
     4, 4, 422333},
    {"r2q1rk1/pP1p2pp/Q4n2/bbp1p3/Np6/1B3NBn/pPPP1PPP/R3K2R b KQ - 0 1",
     4, 4, 422333},
    {"rnbq1k1r/pp1Pbppp/2p5/8/2B5/8/PPP1NnPP/RNBQK2R w KQ - 1 8",
     3, 4, 2103487},
    {"r4rk1/1pp1qppp/p1np1n2/2b1p1B1/2B1P1b1/P1NP1N2/1PP1QPPP/R4RK1 w - - 0 10",
     3, 4, 3894594},
    {"8/2p5/3p4/KP5r/1R2Pp1k/8/6P1/8 b - e3 0 1", 4, 5, 597519},
    {"n1n5/PPPk4/8/8/8/8/4Kppp/5N1N b - - 0 1", 4, 5, 3605103},
    {"r3k2r/1b4bq/8/8/8/8/7B/R3K2R w KQkq - 0 1", 3, 4, 1274206},
    {"8/8/8/8/8/8/6k1/4K2R w K - 0 1", 4, 6, 185867},
    {"K1k5/8/P7/8/8/8/8/8 w - - 0 1", 6, 6, 2217},
};

}  // namespace

TEST_CASE("perft depth 0 and 1") {
  Position start = Position::startpos();
  CHECK(perft(start, 0) == 1);
  CHECK(perft(start, 1) == 20);
  CHECK(perft(start, 2) == 400);
}

TEST_CASE("perft matches the independent naive generator") {
  for (const Fixture& f : kFixtures) {
    CAPTURE(f.fen);
    CHECK(perft(Position::from_fen(f.fen), f.compare_depth) ==
          naive::perft(naive::from_fen(f.fen), f.compare_depth));
  }
}

TEST_CASE("perft matches frozen oracle counts at depth") {
  for (const Fixture& f : kFixtures) {
    CAPTURE(f.fen);
    CHECK(perft(Position::from_fen(f.fen), f.frozen_depth) == f.frozen_nodes);
  }
}
