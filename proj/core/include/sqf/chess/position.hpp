#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqf/chess/types.hpp"

namespace sqf::chess {

enum class CastleSide : uint8_t { King = 0, Queen = 1 };

enum class GameResult : uint8_t { WhiteWin = 0, Draw = 1, BlackWin = 2 };

// Full Markov chess state: placement, side to move, castling rights,
// en passant file, clocks and the hash trail used for repetition detection.
// Immutable; apply() returns a new Position, so values are safe to share
// across threads.
class Position {
 public:
  Position();
  static Position startpos();
  static Position from_fen(std::string_view fen);
  std::string fen() const;

  Color side_to_move() const { return stm_; }
  std::optional<Piece> piece_at(Square s) const;
  bool can_castle(Color c, CastleSide side) const;
  std::optional<int> en_passant_file() const {
    return ep_file_ >= 0 ? std::optional<int>(ep_file_) : std::nullopt;
  }
  int halfmove_clock() const { return halfmove_; }
  int fullmove_number() const { return fullmove_; }

  uint64_t hash() const { return hash_; }
  // Hashes of every position seen so far in the game, this one included.
  const std::vector<uint64_t>& repetition_keys() const { return keys_; }
  int repetition_count() const;
  // True if this position's key occurred earlier in the game.
  bool is_repeat() const { return repetition_count() >= 2; }

  std::vector<Move> legal_moves() const;
  bool is_legal(const Move& m) const;
  Position apply(const Move& m) const;  // throws IllegalMoveError
  // Precondition: m in legal_moves(). Skips the legality re-check; for hot
  // loops (perft, replay) where the caller already holds the legal list.
  Position apply_unchecked(const Move& m) const;

  bool in_check() const;  // side to move in check
  bool is_checkmate() const;
  bool is_stalemate() const;
  bool is_draw_by_fifty_moves() const { return halfmove_ >= 100; }
  bool is_draw_by_repetition() const { return repetition_count() >= 3; }

  Square king_square(Color c) const;
  bool attacked_by(Square s, Color attacker) const;

  bool same_placement(const Position& other) const {
    return board_ == other.board_ && stm_ == other.stm_ &&
           castling_ == other.castling_ && ep_file_ == other.ep_file_;
  }

 private:
  friend Position mirror_position(const Position&);

  // 0 = empty, 1..6 = white P..K, 7..12 = black P..K.
  std::array<uint8_t, 64> board_{};
  Color stm_ = Color::White;
  uint8_t castling_ = 0;  // bit 0 = WK, 1 = WQ, 2 = BK, 3 = BQ
  int8_t ep_file_ = -1;
  int halfmove_ = 0;
  int fullmove_ = 1;
  uint64_t hash_ = 0;
  std::vector<uint64_t> keys_;

  void validate(std::string_view fen) const;
  uint64_t compute_hash() const;
  void generate_pseudo(std::vector<Move>& out) const;
};

// Free-function names used across the project.
Position parse_fen(std::string_view text);
std::string to_fen(const Position& p);
std::vector<Move> legal_moves(const Position& p);
Position apply_move(const Position& p, const Move& m);
uint64_t perft(const Position& p, int depth);

// Color-mirrored twin: piece colors swapped, ranks mirrored, side to move
// flipped, castling rights swapped between colors, en passant file kept.
// The twin starts a fresh repetition trail.
Position mirror_position(const Position& p);

}  // namespace sqf::chess
