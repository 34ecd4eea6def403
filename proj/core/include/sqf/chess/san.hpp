#pragma once

#include <string>
#include <string_view>

#include "sqf/chess/position.hpp"

namespace sqf::chess {

// Resolves standard algebraic notation ("Nf3", "exd5", "O-O", "e8=Q+")
// against the legal moves of p. Throws ParseError when no unique match.
Move san_to_move(const Position& p, std::string_view san);

// Minimal-disambiguation SAN with check/mate suffix.
std::string move_to_san(const Position& p, const Move& m);

}  // namespace sqf::chess
