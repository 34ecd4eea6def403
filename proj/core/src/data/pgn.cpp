#include "sqf/data/pgn.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "sqf/chess/position.hpp"
#include "sqf/chess/san.hpp"
#include "sqf/common/error.hpp"

namespace sqf::data {

namespace {

struct RawGame {
  std::map<std::string, std::string> tags;
  std::vector<std::string> san;
  std::vector<std::string> clocks;  // per san token, "" when absent
  std::string terminator;           // result token, "" when EOF cut the game
  bool any_content = false;
};

void parse_tag(const std::string& line, std::map<std::string, std::string>& tags) {
  size_t key_end = line.find(' ');
  size_t q1 = line.find('"');
  size_t q2 = line.rfind('"');
  if (key_end == std::string::npos || q1 == std::string::npos || q2 <= q1)
    return;  // malformed tag line: dropped, required-tag checks will reject
  tags[line.substr(1, key_end - 1)] = line.substr(q1 + 1, q2 - q1 - 1);
}

bool is_result_token(const std::string& t) {
  return t == "1-0" || t == "0-1" || t == "1/2-1/2" || t == "*";
}

// Extracts the last [%clk ...] value from a brace comment.
std::string find_clock(const std::string& comment) {
  std::string found;
  size_t at = 0;
  while ((at = comment.find("[%clk", at)) != std::string::npos) {
    size_t start = at + 5;
    while (start < comment.size() && std::isspace(static_cast<unsigned char>(comment[start]))) ++start;
    size_t end = comment.find(']', start);
    if (end == std::string::npos) break;
    found = comment.substr(start, end - start);
    at = end;
  }
  return found;
}

// Move tokens may glue the move number on ("1.e4"); strip it.
std::string strip_move_number(const std::string& t) {
  size_t i = 0;
  while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
  if (i == 0) return t;
  size_t dots = i;
  while (dots < t.size() && t[dots] == '.') ++dots;
  if (dots == i) return t;  // digits with no dot: bare move number
  return t.substr(dots);
}

std::optional<RawGame> read_raw(std::istream& in) {
  RawGame g;
  while (in.peek() != EOF &&
         std::isspace(static_cast<unsigned char>(in.peek())))
    in.get();
  while (in.peek() == '[') {
    std::string line;
    std::getline(in, line);
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    parse_tag(line, g.tags);
    g.any_content = true;
    while (in.peek() == '\n' || in.peek() == '\r') in.get();
  }

  std::string tok;
  std::string comment;
  bool in_brace = false;
  int paren = 0;
  bool stop = false;

  auto flush = [&] {
    if (tok.empty()) return;
    std::string t = std::move(tok);
    tok.clear();
    g.any_content = true;
    if (is_result_token(t)) {
      g.terminator = t;
      stop = true;
      return;
    }
    if (t == "0-0" || t == "0-0-0")
      t = t.size() == 3 ? "O-O" : "O-O-O";
    if (t[0] == '$') return;  // numeric annotation glyph
    t = strip_move_number(t);
    if (t.empty() ||
        std::all_of(t.begin(), t.end(), [](unsigned char c) {
          return std::isdigit(c);
        }))
      return;
    while (!t.empty() && (t.back() == '!' || t.back() == '?')) t.pop_back();
    if (t.empty()) return;
    g.san.push_back(t);
    g.clocks.emplace_back();
  };

  while (!stop) {
    int c = in.get();
    if (c == EOF) {
      flush();
      break;
    }
    char ch = static_cast<char>(c);
    if (in_brace) {
      if (ch == '}') {
        in_brace = false;
        if (paren == 0 && !g.san.empty()) {
          std::string clk = find_clock(comment);
          if (!clk.empty()) g.clocks.back() = clk;
        }
      } else {
        comment.push_back(ch);
      }
      continue;
    }
    if (ch == '{') {
      flush();
      in_brace = true;
      comment.clear();
      continue;
    }
    if (ch == ';') {
      flush();
      while (in.peek() != EOF && in.get() != '\n') {
      }
      continue;
    }
    if (ch == '(') {
      flush();
      ++paren;
      continue;
    }
    if (ch == ')') {
      if (paren > 0) --paren;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
      continue;
    }
    if (paren == 0) tok.push_back(ch);
  }

  if (!g.any_content) return std::nullopt;
  return g;
}

std::optional<GameRecord> to_record(const RawGame& raw, std::string* why) {
  if (raw.terminator.empty()) {
    *why = "truncated game";
    return std::nullopt;
  }

  GameRecord g;
  auto elo = [&](const char* tag, int* out) {
    auto it = raw.tags.find(tag);
    if (it == raw.tags.end()) return false;
    const std::string& s = it->second;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
    return ec == std::errc() && p == s.data() + s.size();
  };
  if (!elo("WhiteElo", &g.white_elo) || !elo("BlackElo", &g.black_elo)) {
    *why = "missing rating";
    return std::nullopt;
  }

  auto rit = raw.tags.find("Result");
  const std::string& result = rit != raw.tags.end() ? rit->second : raw.terminator;
  if (result == "1-0")
    g.result = GameResult::WhiteWin;
  else if (result == "0-1")
    g.result = GameResult::BlackWin;
  else if (result == "1/2-1/2")
    g.result = GameResult::Draw;
  else {
    *why = "no result";
    return std::nullopt;
  }

  if (auto it = raw.tags.find("TimeControl"); it != raw.tags.end())
    g.time_control = it->second;

  int with_clock = 0;
  for (const std::string& c : raw.clocks)
    if (!c.empty()) ++with_clock;
  if (with_clock > 0) {
    if (with_clock != static_cast<int>(raw.clocks.size())) {
      *why = "clock mismatch";
      return std::nullopt;
    }
    try {
      for (const std::string& c : raw.clocks)
        g.clocks.push_back(parse_clock(c));
    } catch (const ParseError&) {
      *why = "clock mismatch";
      return std::nullopt;
    }
  }

  chess::Position pos = chess::Position::startpos();
  for (const std::string& san : raw.san) {
    chess::Move m;
    try {
      m = chess::san_to_move(pos, san);
    } catch (const ParseError&) {
      *why = "replay failure";
      return std::nullopt;
    }
    g.moves.push_back(m);
    pos = chess::apply_move(pos, m);
  }
  return g;
}

}  // namespace

std::optional<GameRecord> PgnReader::next() {
  for (;;) {
    auto raw = read_raw(in_);
    if (!raw) return std::nullopt;
    std::string why;
    auto rec = to_record(*raw, &why);
    if (rec) return rec;
    reject(why);
  }
}

int PgnReader::rejected() const {
  int total = 0;
  for (const auto& [_, n] : reasons_) total += n;
  return total;
}

std::vector<GameRecord> parse_pgn(std::istream& in) {
  PgnReader reader(in);
  std::vector<GameRecord> games;
  while (auto g = reader.next()) games.push_back(std::move(*g));
  return games;
}

GameRecord truncate_time_pressure(const GameRecord& g, int threshold) {
  if (g.clocks.empty()) return g;
  size_t keep = g.moves.size();
  for (size_t i = 0; i < g.clocks.size(); ++i)
    if (g.clocks[i] < threshold) {
      keep = i;
      break;
    }
  if (keep == g.moves.size()) return g;
  GameRecord out = g;
  out.moves.resize(keep);
  out.clocks.resize(keep);
  return out;
}

int parse_clock(const std::string& text) {
  double parts[3] = {0, 0, 0};
  int count = 0;
  size_t start = 0;
  while (count < 3) {
    size_t colon = text.find(':', start);
    std::string piece = text.substr(start, colon == std::string::npos
                                               ? std::string::npos
                                               : colon - start);
    if (piece.empty()) throw ParseError("clock: empty field in " + text);
    size_t used = 0;
    try {
      parts[count] = std::stod(piece, &used);
    } catch (const std::exception&) {
      throw ParseError("clock: bad field in " + text);
    }
    if (used != piece.size() || parts[count] < 0)
      throw ParseError("clock: bad field in " + text);
    ++count;
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (count < 2) throw ParseError("clock: expected at least M:SS in " + text);
  double seconds = count == 3
                       ? parts[0] * 3600 + parts[1] * 60 + parts[2]
                       : parts[0] * 60 + parts[1];
  return static_cast<int>(seconds);
}

}  // namespace sqf::data
