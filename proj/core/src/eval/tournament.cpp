#include "sqf/eval/tournament.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "sqf/chess/san.hpp"
#include "sqf/common/error.hpp"

namespace sqf::eval {

namespace {

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

const char* result_text(data::GameResult r) {
  switch (r) {
    case data::GameResult::WhiteWin: return "1-0";
    case data::GameResult::BlackWin: return "0-1";
    default: return "1/2-1/2";
  }
}

}  // namespace

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Checkmate: return "checkmate";
    case Termination::Stalemate: return "stalemate";
    case Termination::Repetition: return "repetition";
    case Termination::FiftyMove: return "fifty-move";
    case Termination::MoveLimit: return "move limit";
  }
  return "?";
}

std::vector<std::string> parse_openings(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::vector<std::string> f;
    std::string tok;
    while (fields >> tok) f.push_back(tok);
    if (f.empty() || f[0][0] == '#' || f.size() < 4) continue;
    std::string fen = f[0] + " " + f[1] + " " + f[2] + " " + f[3];
    if (f.size() >= 6 && all_digits(f[4]) && all_digits(f[5]))
      fen += " " + f[4] + " " + f[5];
    else
      fen += " 0 1";
    try {
      chess::Position::from_fen(fen);
    } catch (const std::runtime_error&) {
      continue;
    }
    out.push_back(std::move(fen));
  }
  return out;
}

std::vector<std::string> load_openings(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  return parse_openings(in);
}

PlayedGame play_game(const Agent& white, const Agent& black,
                     const std::string& start_fen, int max_plies) {
  PlayedGame g;
  g.start_fen = start_fen;
  std::vector<chess::Position> trail;
  trail.push_back(chess::Position::from_fen(start_fen));
  while (true) {
    const chess::Position& p = trail.back();
    if (p.is_checkmate()) {
      g.result = p.side_to_move() == chess::Color::White
                     ? data::GameResult::BlackWin
                     : data::GameResult::WhiteWin;
      g.termination = Termination::Checkmate;
      return g;
    }
    if (p.is_stalemate()) {
      g.termination = Termination::Stalemate;
      return g;
    }
    if (p.is_draw_by_repetition()) {
      g.termination = Termination::Repetition;
      return g;
    }
    if (p.is_draw_by_fifty_moves()) {
      g.termination = Termination::FiftyMove;
      return g;
    }
    if (static_cast<int>(g.moves.size()) >= max_plies) {
      g.termination = Termination::MoveLimit;
      return g;
    }
    const Agent& mover =
        p.side_to_move() == chess::Color::White ? white : black;
    const chess::Move m = select_move(mover, trail);
    g.moves.push_back(m);
    trail.push_back(p.apply(m));
  }
}

MatchResult round_robin(std::span<const Agent> agents, int games_per_pair,
                        std::span<const std::string> openings,
                        int max_plies) {
  if (agents.size() < 2)
    throw ShapeError("round_robin: need at least two agents");
  if (games_per_pair < 1)
    throw ShapeError("round_robin: need at least one game per pair");
  std::vector<std::string> open(openings.begin(), openings.end());
  if (open.empty()) open.push_back(chess::Position::startpos().fen());

  MatchResult r;
  for (const Agent& a : agents) r.names.push_back(a.name);
  const int n = static_cast<int>(agents.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      PairRecord pr;
      pr.a = i;
      pr.b = j;
      for (int g = 0; g < games_per_pair; ++g) {
        const int opening = (g / 2) % static_cast<int>(open.size());
        const bool a_white = g % 2 == 0;
        PlayedGame game =
            play_game(agents[a_white ? i : j], agents[a_white ? j : i],
                      open[opening], max_plies);
        game.white = a_white ? i : j;
        game.black = a_white ? j : i;
        game.opening = opening;
        const bool a_won = game.result == (a_white
                                               ? data::GameResult::WhiteWin
                                               : data::GameResult::BlackWin);
        if (game.result == data::GameResult::Draw) ++pr.draws;
        else if (a_won) ++pr.wins;
        else ++pr.losses;
        r.games.push_back(std::move(game));
      }
      r.pairs.push_back(pr);
    }
  return r;
}

std::string to_pgn(const MatchResult& r) {
  static const std::string kStart = chess::Position::startpos().fen();
  std::string out;
  for (const PlayedGame& g : r.games) {
    out += "[White \"" + r.names[g.white] + "\"]\n";
    out += "[Black \"" + r.names[g.black] + "\"]\n";
    out += std::string("[Result \"") + result_text(g.result) + "\"]\n";
    out += std::string("[Termination \"") + to_string(g.termination) + "\"]\n";
    if (g.start_fen != kStart)
      out += "[SetUp \"1\"]\n[FEN \"" + g.start_fen + "\"]\n";
    out += "\n";
    chess::Position p = chess::Position::from_fen(g.start_fen);
    std::string body;
    for (const chess::Move& m : g.moves) {
      if (p.side_to_move() == chess::Color::White)
        body += std::to_string(p.fullmove_number()) + ". ";
      else if (body.empty())
        body += std::to_string(p.fullmove_number()) + "... ";
      body += chess::move_to_san(p, m) + " ";
      p = p.apply(m);
    }
    body += result_text(g.result);
    out += body + "\n\n";
  }
  return out;
}

}  // namespace sqf::eval
