#include <doctest.h>

#include <algorithm>
#include <set>

#include "sqf/chess/canonical.hpp"
#include "sqf/chess/position.hpp"
#include "sqf/chess/san.hpp"
#include "sqf/common/rng.hpp"
#include "support/naive_movegen.hpp"

using namespace sqf;
using namespace sqf::chess;

namespace {

std::set<std::string> uci_set(const std::vector<Move>& moves) {
  std::set<std::string> out;
  for (const Move& m : moves) out.insert(m.uci());
  return out;
}

Position play(Position p, std::initializer_list<const char*> ucis) {
  for (const char* u : ucis) p = p.apply(Move::parse_uci(u));
  return p;
}

}  // namespace

TEST_CASE("square and move round-trips") {
  CHECK(Square::parse("a1").index() == 0);
  CHECK(Square::parse("e4").index() == 28);
  CHECK(Square::parse("h8").index() == 63);
  for (int i = 0; i < 64; ++i) CHECK(Square::parse(Square(i).name()) == Square(i));
  CHECK_THROWS_AS(Square::parse("i1"), ParseError);
  CHECK_THROWS_AS(Square::parse("a9"), ParseError);

  CHECK(Move::parse_uci("e2e4").uci() == "e2e4");
  CHECK(Move::parse_uci("e7e8q").promotion == PieceKind::Queen);
  CHECK(Move::parse_uci("e7e8n").uci() == "e7e8n");
  CHECK_THROWS_AS(Move::parse_uci("e2e9"), ParseError);
  CHECK_THROWS_AS(Move::parse_uci("e7e8k"), ParseError);
}

TEST_CASE("fen parsing and normalization") {
  const std::string start =
      "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";
  CHECK(Position::from_fen(start).fen() == start);

  Position two_kings = Position::from_fen("8/8/8/8/8/8/8/K6k w - - 0 1");
  CHECK(two_kings.halfmove_clock() == 0);
  CHECK(two_kings.fen() == "8/8/8/8/8/8/8/K6k w - - 0 1");

  SUBCASE("clock fields default when absent") {
    Position p = Position::from_fen("8/8/8/8/8/8/8/K6k w - -");
    CHECK(p.halfmove_clock() == 0);
    CHECK(p.fullmove_number() == 1);
  }

  SUBCASE("parse errors name the offending field") {
    auto message_of = [](const char* fen) {
      try {
        Position::from_fen(fen);
      } catch (const ParseError& e) {
        return std::string(e.what());
      }
      return std::string("no error");
    };
    CHECK(message_of("8/8/8/8/8/8/8/KK5k w - - 0 1").find("king") !=
          std::string::npos);
    CHECK(message_of("p7/8/8/8/8/8/8/K6k w - - 0 1").find("placement") !=
          std::string::npos);
    CHECK(message_of("8/8/8/8/8/8/8/K6k w KX - 0 1").find("castling") !=
          std::string::npos);
    CHECK(message_of("8/8/8/8/8/8/8/K6k w - e6 0 1").find("en passant") !=
          std::string::npos);
    CHECK(message_of("8/8/8/8/8/7R/8/K6k w - - 0 1").find("check") !=
          std::string::npos);
    CHECK(message_of("9/8/8/8/8/8/8/K6k w - - 0 1").find("placement") !=
          std::string::npos);
    CHECK_THROWS_AS(Position::from_fen("8/8/8/8"), ParseError);
  }

  SUBCASE("castling rights must match piece placement") {
    CHECK_THROWS_AS(
        Position::from_fen("4k3/8/8/8/8/8/8/4K2R w KQ - 0 1"), ParseError);
    CHECK_NOTHROW(Position::from_fen("4k3/8/8/8/8/8/8/4K2R w K - 0 1"));
  }
}

TEST_CASE("en passant state from a real double push") {
  Position p = play(Position::startpos(), {"e2e4", "e7e5"});
  CHECK(p.fen() ==
        "rnbqkbnr/pppp1ppp/8/4p3/4P3/8/PPPP1PPP/RNBQKBNR w KQkq e6 0 2");
  CHECK(p.en_passant_file() == 4);
  CHECK(Position::from_fen(p.fen()).fen() == p.fen());
}

TEST_CASE("legal move counts on spec fixtures") {
  CHECK(Position::startpos().legal_moves().size() == 20);
  CHECK(Position::from_fen("8/8/8/8/8/8/8/K6k w - - 0 1").legal_moves().size() ==
        3);

  auto promo = Position::from_fen("7k/4P3/8/8/8/8/8/K7 w - - 0 1").legal_moves();
  auto set = uci_set(promo);
  for (const char* u : {"e7e8n", "e7e8b", "e7e8r", "e7e8q"})
    CHECK(set.count(u) == 1);
}

TEST_CASE("castling availability") {
  Position p = Position::from_fen(
      "r3k2r/pppppppp/8/8/8/8/PPPPPPPP/R3K2R w KQkq - 0 1");
  auto set = uci_set(p.legal_moves());
  CHECK(set.count("e1g1") == 1);
  CHECK(set.count("e1c1") == 1);

  SUBCASE("transit square under attack forbids castling") {
    Position q = Position::from_fen(
        "r3k2r/pppppp1p/8/8/8/7b/PPPPPP1P/R3K2R w KQkq - 0 1");
    // Bishop h3 covers f1: king side blocked, queen side fine.
    auto s = uci_set(q.legal_moves());
    CHECK(s.count("e1g1") == 0);
    CHECK(s.count("e1c1") == 1);
  }

  SUBCASE("rook capture removes the right") {
    Position q = Position::from_fen(
        "r3k2r/8/8/8/8/8/6p1/R3K2R b KQkq - 0 1");
    Position after = q.apply(Move::parse_uci("g2h1q"));
    CHECK_FALSE(after.can_castle(Color::White, CastleSide::King));
    CHECK(after.can_castle(Color::White, CastleSide::Queen));
  }
}

TEST_CASE("en passant capture removes the victim") {
  Position p = play(Position::startpos(),
                    {"e2e4", "a7a6", "e4e5", "d7d5"});
  auto set = uci_set(p.legal_moves());
  REQUIRE(set.count("e5d6") == 1);
  Position after = p.apply(Move::parse_uci("e5d6"));
  CHECK_FALSE(after.piece_at(Square::parse("d5")).has_value());
  CHECK(after.piece_at(Square::parse("d6"))->kind == PieceKind::Pawn);
  CHECK(after.halfmove_clock() == 0);
}

TEST_CASE("apply rejects illegal input") {
  Position p = Position::startpos();
  CHECK_THROWS_AS(p.apply(Move{}), IllegalMoveError);
  CHECK_THROWS_AS(p.apply(Move::parse_uci("e2e5")), IllegalMoveError);
  CHECK_THROWS_AS(p.apply(Move::parse_uci("e7e5")), IllegalMoveError);
}

TEST_CASE("halfmove clock counts quiet plies and resets") {
  Position p = play(Position::startpos(), {"g1f3", "g8f6", "f3g1", "f6g8"});
  CHECK(p.halfmove_clock() == 4);
  p = p.apply(Move::parse_uci("e2e4"));
  CHECK(p.halfmove_clock() == 0);

  Position near_draw = Position::from_fen("4k3/8/8/8/8/8/8/4K2R w - - 99 80");
  CHECK_FALSE(near_draw.is_draw_by_fifty_moves());
  Position drawn = near_draw.apply(Move::parse_uci("h1h2"));
  CHECK(drawn.halfmove_clock() == 100);
  CHECK(drawn.is_draw_by_fifty_moves());
}

TEST_CASE("repetition tracking over a knight shuffle") {
  Position p = Position::startpos();
  CHECK(p.repetition_count() == 1);
  p = play(p, {"g1f3", "g8f6", "f3g1", "f6g8"});
  CHECK(p.repetition_count() == 2);
  CHECK(p.is_repeat());
  CHECK_FALSE(p.is_draw_by_repetition());
  p = play(p, {"g1f3", "g8f6", "f3g1", "f6g8"});
  CHECK(p.repetition_count() == 3);
  CHECK(p.is_draw_by_repetition());

  SUBCASE("same placement via different paths hashes identically") {
    Position a = play(Position::startpos(), {"g1f3", "g8f6"});
    Position b = play(Position::startpos(), {"g1h3", "g8f6", "h3g1", "f6g8",
                                             "g1f3", "g8f6"});
    CHECK(a.same_placement(b));
    CHECK(a.hash() == b.hash());
  }

  SUBCASE("castling rights and en passant feed the hash") {
    Position a = Position::from_fen("4k3/8/8/8/8/8/8/R3K3 w Q - 0 1");
    Position b = Position::from_fen("4k3/8/8/8/8/8/8/R3K3 w - - 0 1");
    CHECK(a.hash() != b.hash());
    Position c = play(Position::startpos(), {"e2e4"});
    Position d = Position::from_fen(
        "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq - 0 1");
    CHECK(c.hash() != d.hash());
  }
}

TEST_CASE("checkmate and stalemate detection") {
  Position fools = play(Position::startpos(), {"f2f3", "e7e5", "g2g4", "d8h4"});
  CHECK(fools.in_check());
  CHECK(fools.is_checkmate());
  CHECK(fools.legal_moves().empty());

  Position stale = Position::from_fen("7k/5Q2/6K1/8/8/8/8/8 b - - 0 1");
  CHECK_FALSE(stale.in_check());
  CHECK(stale.is_stalemate());
  CHECK(stale.legal_moves().empty());
}

TEST_CASE("apply never leaves the mover's king capturable") {
  // Random playouts, side not to move never in check afterwards.
  Rng rng(41);
  for (int game = 0; game < 20; ++game) {
    Position p = Position::startpos();
    for (int ply = 0; ply < 80; ++ply) {
      auto moves = p.legal_moves();
      if (moves.empty() || p.is_draw_by_fifty_moves()) break;
      p = p.apply(moves[rng.below(moves.size())]);
      CHECK_FALSE(p.attacked_by(p.king_square(opposite(p.side_to_move())),
                                p.side_to_move()));
    }
  }
}

TEST_CASE("legal moves match the naive generator along random playouts") {
  Rng rng(7);
  for (int game = 0; game < 8; ++game) {
    Position p = Position::startpos();
    for (int ply = 0; ply < 60; ++ply) {
      naive::State s = naive::from_fen(p.fen());
      CHECK(uci_set(p.legal_moves()) == uci_set(naive::legal_moves(s)));
      auto moves = p.legal_moves();
      if (moves.empty()) break;
      p = p.apply(moves[rng.below(moves.size())]);
    }
  }
}

TEST_CASE("mirror_move is a rank-flip involution") {
  CHECK(mirror_move(Move::parse_uci("e2e4")).uci() == "e7e5");
  CHECK(mirror_move(Move::parse_uci("a1h8")).uci() == "a8h1");
  CHECK(mirror_move(Move::parse_uci("a7a8q")).uci() == "a2a1q");
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    Move m{Square(static_cast<int>(rng.below(64))),
           Square(static_cast<int>(rng.below(64))),
           {}};
    CHECK(mirror_move(mirror_move(m)) == m);
  }
}

TEST_CASE("canonicalize start position") {
  Position start = Position::startpos();
  CanonicalBoard cb = canonicalize(start);
  for (int i = 8; i < 16; ++i) CHECK(cb.plane_at(Square(i)) == 0);   // own pawns
  for (int i = 48; i < 56; ++i) CHECK(cb.plane_at(Square(i)) == 6);  // opp pawns
  CHECK(cb.plane_at(Square::parse("e1")) == 5);   // own king
  CHECK(cb.plane_at(Square::parse("e8")) == 11);  // opp king
  CHECK(cb.plane_at(Square::parse("e4")) == -1);

  // The start array is mirror-symmetric, so the black-to-move view matches.
  Position black_view = Position::from_fen(
      "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR b KQkq - 0 1");
  CHECK(canonicalize(black_view) == cb);
}

TEST_CASE("color-mirrored twin canonicalizes identically") {
  const char* fens[] = {
      "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1",
      "r3k2r/pppppppp/8/8/2B5/5N2/PPPPPPPP/R3K2R w KQkq - 4 9",
      "7k/4P3/8/8/8/8/8/K7 w - - 0 1",
      "rnbqkbnr/pppp1ppp/8/4p3/4P3/8/PPPP1PPP/RNBQKBNR w KQkq e6 0 2",
      "8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1",
  };
  for (const char* fen : fens) {
    Position p = Position::from_fen(fen);
    Position twin = mirror_position(p);
    CHECK(twin.side_to_move() == opposite(p.side_to_move()));
    CHECK(canonicalize(twin) == canonicalize(p));
    CHECK(canonical_castling(twin) == canonical_castling(p));

    // Legal moves map move-for-move under the rank mirror.
    auto mirrored = twin.legal_moves();
    std::vector<Move> mapped;
    mapped.reserve(mirrored.size());
    for (const Move& m : mirrored) mapped.push_back(mirror_move(m));
    CHECK(uci_set(mapped) == uci_set(p.legal_moves()));

    // Canonical target move is invariant under the simultaneous mirror.
    for (const Move& m : p.legal_moves())
      CHECK(canonical_move(p, m) == canonical_move(twin, mirror_move(m)));
  }
}

TEST_CASE("canonical move frame matches the canonical board frame") {
  Position p = play(Position::startpos(), {"e2e4"});  // black to move
  Move reply = Move::parse_uci("e7e5");
  CHECK(canonical_move(p, reply).uci() == "e2e4");
  CHECK(from_canonical_move(p, canonical_move(p, reply)) == reply);

  Position w = Position::startpos();
  CHECK(canonical_move(w, Move::parse_uci("e2e4")).uci() == "e2e4");
}

TEST_CASE("san parsing and rendering") {
  Position p = Position::startpos();
  CHECK(san_to_move(p, "e4").uci() == "e2e4");
  CHECK(san_to_move(p, "Nf3").uci() == "g1f3");
  CHECK_THROWS_AS(san_to_move(p, "Ke2"), ParseError);

  Position sicilian = play(Position::startpos(), {"e2e4", "c7c5"});
  CHECK(move_to_san(sicilian, Move::parse_uci("g1f3")) == "Nf3");

  SUBCASE("captures, promotion, check suffixes") {
    Position q = Position::from_fen("7k/4P3/8/8/8/8/8/K7 w - - 0 1");
    Move promo = san_to_move(q, "e8=Q+");
    CHECK(promo.uci() == "e7e8q");
    CHECK(move_to_san(q, promo) == "e8=Q+");

    Position ep = play(Position::startpos(), {"e2e4", "a7a6", "e4e5", "d7d5"});
    CHECK(san_to_move(ep, "exd6").uci() == "e5d6");
    CHECK(move_to_san(ep, Move::parse_uci("e5d6")) == "exd6");
  }

  SUBCASE("castling notation, both glyph styles") {
    Position c = Position::from_fen(
        "r3k2r/pppppppp/8/8/8/8/PPPPPPPP/R3K2R w KQkq - 0 1");
    CHECK(san_to_move(c, "O-O").uci() == "e1g1");
    CHECK(san_to_move(c, "0-0-0").uci() == "e1c1");
    CHECK(move_to_san(c, Move::parse_uci("e1g1")) == "O-O");
  }

  SUBCASE("file and rank disambiguation") {
    Position d = Position::from_fen("2k5/8/8/8/8/8/1K6/R6R w - - 0 1");
    CHECK(san_to_move(d, "Rad1").uci() == "a1d1");
    CHECK(san_to_move(d, "Rhd1").uci() == "h1d1");
    CHECK(move_to_san(d, Move::parse_uci("a1d1")) == "Rad1");
    CHECK_THROWS_AS(san_to_move(d, "Rd1"), ParseError);
  }

  SUBCASE("round-trip across random play") {
    Rng rng(11);
    Position p = Position::startpos();
    for (int ply = 0; ply < 120; ++ply) {
      auto moves = p.legal_moves();
      if (moves.empty()) break;
      for (const Move& m : moves)
        CHECK(san_to_move(p, move_to_san(p, m)) == m);
      p = p.apply(moves[rng.below(moves.size())]);
    }
  }
}

TEST_CASE("checkmate suffix in san") {
  Position pre = play(Position::startpos(), {"f2f3", "e7e5", "g2g4"});
  CHECK(move_to_san(pre, Move::parse_uci("d8h4")) == "Qh4#");
}
