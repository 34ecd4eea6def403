#include "sqf/chess/san.hpp"

#include <cctype>
#include <vector>

namespace sqf::chess {

namespace {

std::optional<PieceKind> letter_kind(char c) {
  switch (c) {
    case 'N': return PieceKind::Knight;
    case 'B': return PieceKind::Bishop;
    case 'R': return PieceKind::Rook;
    case 'Q': return PieceKind::Queen;
    case 'K': return PieceKind::King;
    default: return std::nullopt;
  }
}

char kind_letter(PieceKind k) { return "PNBRQK"[static_cast<int>(k)]; }

}  // namespace

Move san_to_move(const Position& p, std::string_view san) {
  std::string body(san);
  while (!body.empty() &&
         (body.back() == '+' || body.back() == '#' || body.back() == '!' ||
          body.back() == '?'))
    body.pop_back();
  if (body.empty()) throw ParseError("empty san token");

  const auto legal = p.legal_moves();
  const int home = p.side_to_move() == Color::White ? 0 : 7;

  if (body == "O-O" || body == "0-0" || body == "O-O-O" || body == "0-0-0") {
    const int to_file = body.size() == 3 ? 6 : 2;
    const Move want{Square::from_file_rank(4, home),
                    Square::from_file_rank(to_file, home), {}};
    for (const Move& m : legal)
      if (m == want &&
          p.piece_at(m.from) &&
          p.piece_at(m.from)->kind == PieceKind::King)
        return m;
    throw ParseError("illegal castling '" + std::string(san) + "'");
  }

  PieceKind kind = PieceKind::Pawn;
  size_t i = 0;
  if (auto k = letter_kind(body[0])) {
    kind = *k;
    i = 1;
  }

  std::optional<PieceKind> promo;
  if (size_t eq = body.find('='); eq != std::string::npos) {
    if (eq + 1 >= body.size()) throw ParseError("san promotion missing piece");
    promo = letter_kind(body[eq + 1]);
    if (!promo || *promo == PieceKind::King)
      throw ParseError("bad san promotion '" + std::string(san) + "'");
    body.erase(eq);
  }

  // Strip the destination square from the tail; what remains between the
  // piece letter and the destination is disambiguation plus optional 'x'.
  if (body.size() < i + 2) throw ParseError("san too short: '" +
                                            std::string(san) + "'");
  const Square to = Square::parse(body.substr(body.size() - 2));
  std::string middle = body.substr(i, body.size() - 2 - i);
  if (!middle.empty() && middle.back() == 'x') middle.pop_back();

  int want_file = -1, want_rank = -1;
  for (char c : middle) {
    if (c >= 'a' && c <= 'h')
      want_file = c - 'a';
    else if (c >= '1' && c <= '8')
      want_rank = c - '1';
    else
      throw ParseError(std::string("bad san disambiguation '") + c + "'");
  }

  std::vector<Move> matches;
  for (const Move& m : legal) {
    if (m.to != to) continue;
    const auto piece = p.piece_at(m.from);
    if (!piece || piece->kind != kind) continue;
    if (want_file >= 0 && m.from.file() != want_file) continue;
    if (want_rank >= 0 && m.from.rank() != want_rank) continue;
    if (promo.has_value() != m.promotion.has_value()) continue;
    if (promo && *promo != *m.promotion) continue;
    matches.push_back(m);
  }
  if (matches.size() != 1)
    throw ParseError("san '" + std::string(san) + "' matches " +
                     std::to_string(matches.size()) + " moves in " + p.fen());
  return matches[0];
}

std::string move_to_san(const Position& p, const Move& m) {
  if (!p.is_legal(m))
    throw IllegalMoveError("cannot render illegal move " + m.uci());

  const auto piece = p.piece_at(m.from);
  const Position after = p.apply(m);
  std::string suffix;
  if (after.in_check()) suffix = after.is_checkmate() ? "#" : "+";

  if (piece->kind == PieceKind::King &&
      std::abs(m.to.file() - m.from.file()) == 2)
    return (m.to.file() == 6 ? "O-O" : "O-O-O") + suffix;

  const bool capture = p.piece_at(m.to).has_value() ||
                       (piece->kind == PieceKind::Pawn &&
                        m.from.file() != m.to.file());

  std::string out;
  if (piece->kind == PieceKind::Pawn) {
    if (capture) out = std::string(1, static_cast<char>('a' + m.from.file())) +
                       "x";
  } else {
    out = std::string(1, kind_letter(piece->kind));
    bool ambiguous = false, same_file = false, same_rank = false;
    for (const Move& other : p.legal_moves()) {
      if (other.to != m.to || other.from == m.from) continue;
      const auto op = p.piece_at(other.from);
      if (!op || op->kind != piece->kind) continue;
      ambiguous = true;
      if (other.from.file() == m.from.file()) same_file = true;
      if (other.from.rank() == m.from.rank()) same_rank = true;
    }
    if (ambiguous) {
      if (!same_file)
        out += static_cast<char>('a' + m.from.file());
      else if (!same_rank)
        out += static_cast<char>('1' + m.from.rank());
      else
        out += m.from.name();
    }
    if (capture) out += 'x';
  }
  out += m.to.name();
  if (m.promotion) {
    out += '=';
    out += kind_letter(*m.promotion);
  }
  return out + suffix;
}

}  // namespace sqf::chess
