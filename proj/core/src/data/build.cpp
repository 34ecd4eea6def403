#include "sqf/data/build.hpp"

#include <algorithm>

#include "sqf/common/error.hpp"

namespace sqf::data {

Outcome outcome_for(GameResult r, chess::Color mover) {
  if (r == GameResult::Draw) return Outcome::Draw;
  const bool white_won = r == GameResult::WhiteWin;
  const bool mover_white = mover == chess::Color::White;
  return white_won == mover_white ? Outcome::Win : Outcome::Loss;
}

TrainingExample build_example(std::span<const chess::Position> states,
                              std::span<const chess::Move> moves, int ply,
                              int n, int white_elo, int black_elo,
                              GameResult result) {
  if (ply < 0 || ply >= static_cast<int>(moves.size()))
    throw ShapeError("build_example: ply " + std::to_string(ply) +
                     " out of range for " + std::to_string(moves.size()) +
                     " moves");
  if (states.size() < moves.size() + 1)
    throw ShapeError("build_example: state list shorter than the game");

  const chess::Position& current = states[ply];
  const chess::Color mover = current.side_to_move();

  TrainingExample ex;
  ex.boards.reserve(n + 1);
  ex.repetition.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const int src = std::max(0, ply - i);
    ex.boards.push_back(chess::canonicalize(states[src], mover));
    ex.repetition.push_back(states[src].repetition_count() >= 2 ? 1 : 0);
  }

  const auto castle = chess::canonical_castling(current);
  std::copy(castle.begin(), castle.end(), ex.castling.begin());
  ex.black_to_move = mover == chess::Color::Black;
  ex.halfmove_clock = current.halfmove_clock();

  ex.active_rating = mover == chess::Color::White ? white_elo : black_elo;
  ex.opponent_rating = mover == chess::Color::White ? black_elo : white_elo;

  ex.target_move = chess::canonical_move(current, moves[ply]);
  ex.target_outcome = outcome_for(result, mover);
  ex.ply = ply;

  for (const chess::Move& m : legal_moves(current))
    ex.legal.push_back(chess::canonical_move(current, m));
  return ex;
}

std::vector<chess::Position> replay_game(const GameRecord& g) {
  std::vector<chess::Position> states;
  states.reserve(g.moves.size() + 1);
  states.push_back(chess::Position::startpos());
  for (const chess::Move& m : g.moves)
    states.push_back(states.back().apply(m));
  return states;
}

std::vector<int> sample_positions(int plies, int k, Rng& rng) {
  std::vector<int> all(plies);
  for (int i = 0; i < plies; ++i) all[i] = i;
  if (k >= plies) return all;
  for (int i = 0; i < k; ++i)
    std::swap(all[i], all[i + rng.below(plies - i)]);
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<int> sample_positions(const GameRecord& g, int k, Rng& rng) {
  return sample_positions(static_cast<int>(g.moves.size()), k, rng);
}

TrainingExample build_example(const GameRecord& g, int ply, int n) {
  const auto states = replay_game(g);
  return build_example(states, g.moves, ply, n, g.white_elo, g.black_elo,
                       g.result);
}

}  // namespace sqf::data
