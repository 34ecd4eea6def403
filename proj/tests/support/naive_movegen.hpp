#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sqf/chess/types.hpp"

// Independent rule-by-rule move generator used only to cross-check the fast
// generator. Deliberately naive: FEN-letter board, all 64x64 (from, to)
// candidates tested one by one, own make-move and attack probe. Shares
// nothing with sqf::chess::Position beyond the Move value type.
namespace naive {

struct State {
  std::array<char, 64> board;  // FEN letters, '.' for empty; a1 = index 0
  bool white_to_move = true;
  bool wk = false, wq = false, bk = false, bq = false;
  int ep_file = -1;
};

State from_fen(const std::string& fen);
bool attacked(const State& s, int sq, bool by_white);
std::vector<sqf::chess::Move> legal_moves(const State& s);
State make(const State& s, const sqf::chess::Move& m);
uint64_t perft(const State& s, int depth);

}  // namespace naive
