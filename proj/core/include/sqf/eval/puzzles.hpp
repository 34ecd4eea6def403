#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "sqf/chess/position.hpp"
#include "sqf/eval/agent.hpp"

namespace sqf::eval {

// Tactics puzzle; solution[0] is the opponent's setup move from `fen`, then
// mover and opponent moves alternate.
struct Puzzle {
  std::string id;
  std::string fen;
  std::vector<chess::Move> solution;
  int rating = 0;
};

struct PuzzleSet {
  std::vector<Puzzle> puzzles;
  int64_t skipped = 0;  // rows that failed to parse or replay
};

// Reads the public puzzle CSV layout (PuzzleId,FEN,Moves,Rating,...),
// header optional. Corrupt rows are skipped and counted.
PuzzleSet parse_puzzles_csv(std::istream& in);
PuzzleSet load_puzzles_csv(const std::filesystem::path& file);

// Plays the puzzle: after the setup move the agent must reproduce every
// mover move in order, opponent replies forced from the solution. Any
// deviation fails, except a move giving immediate checkmate when
// allow_alternate_mate is set.
bool solve_puzzle(const Agent& agent, const Puzzle& puzzle,
                  bool allow_alternate_mate = true);

struct PuzzleStats {
  int64_t n = 0;
  int64_t solved = 0;
  double accuracy = 0.0;
};

PuzzleStats solve_puzzles(const Agent& agent, std::span<const Puzzle> puzzles,
                          bool allow_alternate_mate = true);

}  // namespace sqf::eval
