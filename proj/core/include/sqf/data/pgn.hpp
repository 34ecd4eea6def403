#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sqf/chess/types.hpp"
#include "sqf/data/example.hpp"

namespace sqf::data {

struct GameRecord {
  std::vector<chess::Move> moves;
  // Mover's remaining seconds after each ply; empty when the source carries
  // no clock comments. When present, aligned one-to-one with moves.
  std::vector<int> clocks;
  int white_elo = 0;
  int black_elo = 0;
  GameResult result = GameResult::Draw;
  std::string time_control;

  bool operator==(const GameRecord&) const = default;
};

// Streaming reader over a PGN archive. next() yields only games that carry
// both ratings, a decided-or-drawn result, and a movetext that replays
// legally from the start position; everything else is skipped and counted.
class PgnReader {
 public:
  explicit PgnReader(std::istream& in) : in_(in) {}

  std::optional<GameRecord> next();

  int rejected() const;
  const std::map<std::string, int>& reject_reasons() const { return reasons_; }

 private:
  void reject(const std::string& reason) { ++reasons_[reason]; }

  std::istream& in_;
  std::map<std::string, int> reasons_;
};

// Eager convenience wrapper.
std::vector<GameRecord> parse_pgn(std::istream& in);

// Drops moves at and after the first ply where the mover finished with
// fewer than `threshold` seconds left. Identity when clocks are absent.
GameRecord truncate_time_pressure(const GameRecord& g, int threshold = 30);

// Parses "H:MM:SS" (optionally fractional seconds) to whole seconds.
int parse_clock(const std::string& text);

}  // namespace sqf::data
