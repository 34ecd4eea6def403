#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "sqf/common/error.hpp"

namespace sqf::chess {

enum class Color : uint8_t { White = 0, Black = 1 };

constexpr Color opposite(Color c) {
  return c == Color::White ? Color::Black : Color::White;
}

enum class PieceKind : uint8_t { Pawn = 0, Knight, Bishop, Rook, Queen, King };

struct Piece {
  Color color;
  PieceKind kind;
  bool operator==(const Piece&) const = default;
};

// Board square indexed a1=0, b1=1, ..., h8=63 (file-major within rank).
class Square {
 public:
  constexpr Square() = default;
  constexpr explicit Square(int index) : index_(static_cast<uint8_t>(index)) {}
  static constexpr Square from_file_rank(int file, int rank) {
    return Square(rank * 8 + file);
  }
  static Square parse(std::string_view name);  // "e4" -> 28

  constexpr int index() const { return index_; }
  constexpr int file() const { return index_ % 8; }
  constexpr int rank() const { return index_ / 8; }

  // Rank flipped, file preserved.
  constexpr Square mirrored() const {
    return from_file_rank(file(), 7 - rank());
  }

  std::string name() const;

  constexpr auto operator<=>(const Square&) const = default;

 private:
  uint8_t index_ = 0;
};

struct Move {
  Square from;
  Square to;
  std::optional<PieceKind> promotion;  // Knight/Bishop/Rook/Queen

  static Move parse_uci(std::string_view text);  // "e2e4", "e7e8q"
  std::string uci() const;

  // Deterministic ordering key: (from, to, promotion), promotion None < N < B < R < Q.
  int encoding() const {
    int promo = promotion ? static_cast<int>(*promotion) : 0;
    return (from.index() * 64 + to.index()) * 5 + promo;
  }

  bool operator==(const Move&) const = default;
};

// Rank-mirrors both endpoints, keeps the promotion kind. Involution.
inline Move mirror_move(const Move& m) {
  return Move{m.from.mirrored(), m.to.mirrored(), m.promotion};
}

}  // namespace sqf::chess
