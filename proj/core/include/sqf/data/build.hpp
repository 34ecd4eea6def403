#pragma once

#include <span>
#include <vector>

#include "sqf/chess/position.hpp"
#include "sqf/common/rng.hpp"
#include "sqf/data/example.hpp"
#include "sqf/data/pgn.hpp"

namespace sqf::data {

// Builds the example for `ply` from a replayed game: states[k] is the
// position after k plies (states[0] the start), moves[ply] the move played
// from states[ply]. The board stack holds the current position and the n
// positions before it, all canonicalized to the mover at `ply`; history
// missing off the front of the game repeats the earliest position.
TrainingExample build_example(std::span<const chess::Position> states,
                              std::span<const chess::Move> moves, int ply,
                              int n, int white_elo, int black_elo,
                              GameResult result);

// All length(moves)+1 positions of the game, start position first.
// Throws IllegalMoveError when the record does not replay.
std::vector<chess::Position> replay_game(const GameRecord& g);

// min(k, plies) distinct indices drawn uniformly without replacement from
// [0, plies), returned ascending.
std::vector<int> sample_positions(int plies, int k, Rng& rng);
std::vector<int> sample_positions(const GameRecord& g, int k, Rng& rng);

// Convenience overload replaying g internally; prefer the span form when
// building many plies of one game.
TrainingExample build_example(const GameRecord& g, int ply, int n);

}  // namespace sqf::data
