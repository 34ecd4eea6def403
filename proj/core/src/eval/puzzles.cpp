#include "sqf/eval/puzzles.hpp"

#include <charconv>
#include <fstream>

#include "sqf/common/error.hpp"

namespace sqf::eval {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t at = line.find(sep, start);
    if (at == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, at - start));
    start = at + 1;
  }
}

// Throws on any malformed field; the solution must replay legally.
Puzzle parse_row(const std::vector<std::string>& cols) {
  if (cols.size() < 4) throw ParseError("puzzle row: too few columns");
  Puzzle pz;
  pz.id = cols[0];
  pz.fen = cols[1];
  const std::string& r = cols[3];
  auto [ptr, ec] = std::from_chars(r.data(), r.data() + r.size(), pz.rating);
  if (ec != std::errc() || ptr != r.data() + r.size())
    throw ParseError("puzzle row: bad rating '" + r + "'");

  chess::Position p = chess::Position::from_fen(pz.fen);
  for (const std::string& mv : split(cols[2], ' ')) {
    if (mv.empty()) continue;
    const chess::Move m = chess::Move::parse_uci(mv);
    p = p.apply(m);
    pz.solution.push_back(m);
  }
  if (pz.solution.size() < 2)
    throw ParseError("puzzle row: no mover move after the setup");
  return pz;
}

}  // namespace

PuzzleSet parse_puzzles_csv(std::istream& in) {
  PuzzleSet set;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first && line.rfind("PuzzleId", 0) == 0) {
      first = false;
      continue;
    }
    first = false;
    try {
      set.puzzles.push_back(parse_row(split(line, ',')));
    } catch (const std::runtime_error&) {
      ++set.skipped;
    }
  }
  return set;
}

PuzzleSet load_puzzles_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  return parse_puzzles_csv(in);
}

bool solve_puzzle(const Agent& agent, const Puzzle& puzzle,
                  bool allow_alternate_mate) {
  if (puzzle.solution.size() < 2)
    throw ShapeError("solve_puzzle: solution has no mover move");
  std::vector<chess::Position> trail;
  trail.push_back(chess::Position::from_fen(puzzle.fen));
  trail.push_back(trail.back().apply(puzzle.solution[0]));
  for (size_t i = 1; i < puzzle.solution.size(); ++i) {
    if (i % 2 == 1) {
      const chess::Move played = select_move(agent, trail);
      if (played != puzzle.solution[i])
        return allow_alternate_mate &&
               trail.back().apply(played).is_checkmate();
    }
    trail.push_back(trail.back().apply(puzzle.solution[i]));
  }
  return true;
}

PuzzleStats solve_puzzles(const Agent& agent, std::span<const Puzzle> puzzles,
                          bool allow_alternate_mate) {
  PuzzleStats stats;
  stats.n = static_cast<int64_t>(puzzles.size());
  for (const Puzzle& pz : puzzles)
    if (solve_puzzle(agent, pz, allow_alternate_mate)) ++stats.solved;
  stats.accuracy =
      stats.n ? static_cast<double>(stats.solved) / stats.n : 0.0;
  return stats;
}

}  // namespace sqf::eval
