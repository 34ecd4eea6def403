#pragma once

#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "sqf/chess/position.hpp"
#include "sqf/data/example.hpp"
#include "sqf/eval/agent.hpp"

namespace sqf::eval {

enum class Termination {
  Checkmate,
  Stalemate,
  Repetition,
  FiftyMove,
  MoveLimit
};

const char* to_string(Termination t);

struct PlayedGame {
  int white = 0;  // agent indices into MatchResult::names
  int black = 0;
  int opening = 0;
  std::string start_fen;
  data::GameResult result = data::GameResult::Draw;
  Termination termination = Termination::MoveLimit;
  std::vector<chess::Move> moves;
};

struct PairRecord {
  int a = 0;
  int b = 0;
  int wins = 0;  // from a's side
  int draws = 0;
  int losses = 0;

  int games() const { return wins + draws + losses; }
  double points() const { return wins + 0.5 * draws; }
};

struct MatchResult {
  std::vector<std::string> names;
  std::vector<PairRecord> pairs;
  std::vector<PlayedGame> games;
};

// Openings as FEN lines; EPD rows keep their four position fields with the
// move counters defaulted. Blank lines, '#' comments and rows that fail to
// parse are dropped.
std::vector<std::string> parse_openings(std::istream& in);
std::vector<std::string> load_openings(const std::filesystem::path& file);

// One game to the end: no resignation or adjudication, draws by stalemate,
// threefold repetition and the fifty-move rule, plus a drawn cutoff at
// max_plies. The white/black/opening indices are left for the caller.
PlayedGame play_game(const Agent& white, const Agent& black,
                     const std::string& start_fen, int max_plies = 512);

// Every agent pair plays games_per_pair games, cycling the openings with
// colors swapped on every second game.
MatchResult round_robin(std::span<const Agent> agents, int games_per_pair,
                        std::span<const std::string> openings,
                        int max_plies = 512);

std::string to_pgn(const MatchResult& r);

}  // namespace sqf::eval
