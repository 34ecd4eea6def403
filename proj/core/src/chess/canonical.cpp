#include "sqf/chess/canonical.hpp"

namespace sqf::chess {

CanonicalBoard canonicalize(const Position& p, Color perspective) {
  const bool flip = perspective == Color::Black;
  CanonicalBoard out;
  for (int i = 0; i < 64; ++i) {
    const Square s(i);
    const auto piece = p.piece_at(s);
    if (!piece) continue;
    const bool own = piece->color == perspective;
    const int plane = static_cast<int>(piece->kind) + (own ? 0 : 6);
    out.set_plane(flip ? s.mirrored() : s, plane);
  }
  return out;
}

CanonicalBoard canonicalize(const Position& p) {
  return canonicalize(p, p.side_to_move());
}

Move canonical_move(const Position& p, const Move& m) {
  return p.side_to_move() == Color::Black ? mirror_move(m) : m;
}

Move from_canonical_move(const Position& p, const Move& m) {
  return canonical_move(p, m);
}

std::array<bool, 4> canonical_castling(const Position& p) {
  const Color us = p.side_to_move();
  const Color them = opposite(us);
  return {p.can_castle(us, CastleSide::King), p.can_castle(us, CastleSide::Queen),
          p.can_castle(them, CastleSide::King),
          p.can_castle(them, CastleSide::Queen)};
}

}  // namespace sqf::chess
