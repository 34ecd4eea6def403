#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sqf/chess/canonical.hpp"
#include "sqf/chess/position.hpp"
#include "sqf/chess/types.hpp"

namespace sqf::data {

using GameResult = chess::GameResult;

// Game result from the mover's perspective.
enum class Outcome : uint8_t { Win = 0, Draw = 1, Loss = 2 };

Outcome outcome_for(GameResult r, chess::Color mover);

// One supervised position. Everything is expressed in the mover's canonical
// frame: boards[0] is the position to move on, boards[i] is i plies earlier,
// and missing history repeats the earliest available board.
struct TrainingExample {
  std::vector<chess::CanonicalBoard> boards;  // size n+1, current first
  std::vector<uint8_t> repetition;            // per slot: seen before in game

  // Side/state flags of the current position, canonical castling order
  // (own K, own Q, opp K, opp Q).
  std::array<bool, 4> castling{};
  bool black_to_move = false;
  int halfmove_clock = 0;

  int active_rating = 0;
  int opponent_rating = 0;

  chess::Move target_move;  // canonical frame
  Outcome target_outcome = Outcome::Draw;
  int ply = 0;

  // Legal moves in the canonical frame; the policy loss masks to these.
  std::vector<chess::Move> legal;
  // Optional soft policy target over `legal` (same order); empty means the
  // hard target_move label is used.
  std::vector<float> soft_target;

  int history() const { return static_cast<int>(boards.size()) - 1; }

  bool operator==(const TrainingExample&) const = default;
};

}  // namespace sqf::data
