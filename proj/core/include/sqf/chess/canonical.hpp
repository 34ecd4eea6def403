#pragma once

#include <array>
#include <cstdint>

#include "sqf/chess/position.hpp"

namespace sqf::chess {

// Board seen from the side to move: plane order
// [own P,N,B,R,Q,K, opp P,N,B,R,Q,K], own pieces advancing toward rank 7.
class CanonicalBoard {
 public:
  static constexpr int kPlanes = 12;

  CanonicalBoard() { plane_.fill(-1); }

  // Plane index 0..11 at square, or -1 when empty.
  int plane_at(Square s) const { return plane_[s.index()]; }
  void set_plane(Square s, int plane) {
    plane_[s.index()] = static_cast<int8_t>(plane);
  }

  bool operator==(const CanonicalBoard&) const = default;

 private:
  std::array<int8_t, 64> plane_;
};

CanonicalBoard canonicalize(const Position& p);
// History boards are viewed from the perspective of the player to move on
// the current board, not their own side to move.
CanonicalBoard canonicalize(const Position& p, Color perspective);

// Move expressed in the mover's frame: rank-mirrored when black is to move.
Move canonical_move(const Position& p, const Move& m);
// Inverse map back to the absolute frame (the mirror is an involution).
Move from_canonical_move(const Position& p, const Move& m);

// Castling rights reordered to (own king side, own queen side,
// opp king side, opp queen side).
std::array<bool, 4> canonical_castling(const Position& p);

}  // namespace sqf::chess
