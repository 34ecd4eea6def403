#pragma once

#include <cstdlib>
#include <string>

#include "sqf/chess/types.hpp"
#include "sqf/common/error.hpp"

namespace sqf::model {

// Canonical policy column layout: 64*64 from-to scores first, then the
// promotion block. Promotions live on (from rank 6, to rank 7, |Δfile| <= 1):
// 22 from-to pairs, 4 pieces each (N, B, R, Q), appended pair-major.
inline constexpr int kBaseColumns = 64 * 64;
inline constexpr int kPromoPairs = 22;
inline constexpr int kPromoPieces = 4;
inline constexpr int kPromoColumns = kPromoPairs * kPromoPieces;
inline constexpr int kPolicyColumns = kBaseColumns + kPromoColumns;

// Index of (from_file, to_file) among the 22 legal promotion file pairs,
// ordered by from_file then to_file.
inline int promo_pair_index(int from_file, int to_file) {
  if (from_file < 0 || from_file > 7 || to_file < 0 || to_file > 7 ||
      std::abs(to_file - from_file) > 1)
    throw ShapeError("promo_pair_index: bad file pair " +
                     std::to_string(from_file) + "->" +
                     std::to_string(to_file));
  int idx = 0;
  for (int f = 0; f < from_file; ++f) idx += (f == 0 || f == 7) ? 2 : 3;
  idx += to_file - (from_file == 0 ? from_file : from_file - 1);
  return idx;
}

inline int promo_piece_index(chess::PieceKind k) {
  switch (k) {
    case chess::PieceKind::Knight: return 0;
    case chess::PieceKind::Bishop: return 1;
    case chess::PieceKind::Rook: return 2;
    case chess::PieceKind::Queen: return 3;
    default:
      throw ShapeError("promo_piece_index: not a promotion piece");
  }
}

// Column of a canonical-frame move. Promotion moves must run from rank 6 to
// rank 7 with at most one file of sideways travel.
inline int policy_column(const chess::Move& m) {
  if (!m.promotion) return m.from.index() * 64 + m.to.index();
  if (m.from.rank() != 6 || m.to.rank() != 7)
    throw ShapeError("policy_column: promotion off the last rank");
  return kBaseColumns +
         promo_pair_index(m.from.file(), m.to.file()) * kPromoPieces +
         promo_piece_index(*m.promotion);
}

}  // namespace sqf::model
