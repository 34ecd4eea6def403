#include "sqf/chess/position.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "sqf/common/rng.hpp"

namespace sqf::chess {

namespace {

constexpr uint8_t kEmpty = 0;

inline uint8_t make_code(Color c, PieceKind k) {
  return static_cast<uint8_t>(1 + static_cast<int>(k) +
                              (c == Color::Black ? 6 : 0));
}
inline Color code_color(uint8_t code) {
  return code <= 6 ? Color::White : Color::Black;
}
inline PieceKind code_kind(uint8_t code) {
  return static_cast<PieceKind>((code - 1) % 6);
}

constexpr int kKnightDeltas[8][2] = {{1, 2},   {2, 1},   {2, -1}, {1, -2},
                                     {-1, -2}, {-2, -1}, {-2, 1}, {-1, 2}};
constexpr int kKingDeltas[8][2] = {{1, 0},  {1, 1},   {0, 1},  {-1, 1},
                                   {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
constexpr int kBishopDirs[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
constexpr int kRookDirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

inline bool on_board(int file, int rank) {
  return file >= 0 && file < 8 && rank >= 0 && rank < 8;
}

// Castling right bits.
constexpr uint8_t kWhiteKingSide = 1;
constexpr uint8_t kWhiteQueenSide = 2;
constexpr uint8_t kBlackKingSide = 4;
constexpr uint8_t kBlackQueenSide = 8;

inline uint8_t castle_bit(Color c, CastleSide s) {
  if (c == Color::White)
    return s == CastleSide::King ? kWhiteKingSide : kWhiteQueenSide;
  return s == CastleSide::King ? kBlackKingSide : kBlackQueenSide;
}

struct Zobrist {
  uint64_t piece[13][64];  // index 0 unused
  uint64_t side;
  uint64_t castling[16];
  uint64_t ep_file[8];

  Zobrist() {
    Rng rng(0x5153554152455321ull);
    for (auto& row : piece)
      for (auto& v : row) v = rng.next_u64();
    side = rng.next_u64();
    for (auto& v : castling) v = rng.next_u64();
    for (auto& v : ep_file) v = rng.next_u64();
  }
};

const Zobrist& zobrist() {
  static const Zobrist z;
  return z;
}

using Board = std::array<uint8_t, 64>;

bool board_attacked(const Board& board, Square target, Color attacker) {
  const int tf = target.file(), tr = target.rank();
  // Pawns: a white pawn on (tf +/- 1, tr - 1) attacks target.
  const int pawn_rank = attacker == Color::White ? tr - 1 : tr + 1;
  const uint8_t pawn = make_code(attacker, PieceKind::Pawn);
  for (int df : {-1, 1}) {
    if (on_board(tf + df, pawn_rank) &&
        board[Square::from_file_rank(tf + df, pawn_rank).index()] == pawn)
      return true;
  }
  const uint8_t knight = make_code(attacker, PieceKind::Knight);
  for (const auto& d : kKnightDeltas) {
    if (on_board(tf + d[0], tr + d[1]) &&
        board[Square::from_file_rank(tf + d[0], tr + d[1]).index()] == knight)
      return true;
  }
  const uint8_t king = make_code(attacker, PieceKind::King);
  for (const auto& d : kKingDeltas) {
    if (on_board(tf + d[0], tr + d[1]) &&
        board[Square::from_file_rank(tf + d[0], tr + d[1]).index()] == king)
      return true;
  }
  const uint8_t bishop = make_code(attacker, PieceKind::Bishop);
  const uint8_t rook = make_code(attacker, PieceKind::Rook);
  const uint8_t queen = make_code(attacker, PieceKind::Queen);
  for (const auto& d : kBishopDirs) {
    int f = tf + d[0], r = tr + d[1];
    while (on_board(f, r)) {
      uint8_t code = board[Square::from_file_rank(f, r).index()];
      if (code != kEmpty) {
        if (code == bishop || code == queen) return true;
        break;
      }
      f += d[0];
      r += d[1];
    }
  }
  for (const auto& d : kRookDirs) {
    int f = tf + d[0], r = tr + d[1];
    while (on_board(f, r)) {
      uint8_t code = board[Square::from_file_rank(f, r).index()];
      if (code != kEmpty) {
        if (code == rook || code == queen) return true;
        break;
      }
      f += d[0];
      r += d[1];
    }
  }
  return false;
}

// Applies move effects to a bare board. No validation; used by the
// legality filter, so it must handle en passant, castling and promotion.
void board_make(Board& board, const Move& m, Color mover) {
  const uint8_t code = board[m.from.index()];
  const PieceKind kind = code_kind(code);
  const int from_idx = m.from.index(), to_idx = m.to.index();

  if (kind == PieceKind::Pawn && m.from.file() != m.to.file() &&
      board[to_idx] == kEmpty) {
    // En passant: captured pawn sits on (to file, from rank).
    board[Square::from_file_rank(m.to.file(), m.from.rank()).index()] = kEmpty;
  }
  board[to_idx] = m.promotion ? make_code(mover, *m.promotion) : code;
  board[from_idx] = kEmpty;

  if (kind == PieceKind::King && std::abs(m.to.file() - m.from.file()) == 2) {
    const int rank = m.from.rank();
    if (m.to.file() == 6) {  // king side: rook h -> f
      board[Square::from_file_rank(5, rank).index()] =
          board[Square::from_file_rank(7, rank).index()];
      board[Square::from_file_rank(7, rank).index()] = kEmpty;
    } else {  // queen side: rook a -> d
      board[Square::from_file_rank(3, rank).index()] =
          board[Square::from_file_rank(0, rank).index()];
      board[Square::from_file_rank(0, rank).index()] = kEmpty;
    }
  }
}

Square find_king(const Board& board, Color c) {
  const uint8_t code = make_code(c, PieceKind::King);
  for (int i = 0; i < 64; ++i)
    if (board[i] == code) return Square(i);
  return Square(64);  // caller guarantees a king exists for valid positions
}

}  // namespace

Square Square::parse(std::string_view name) {
  if (name.size() != 2 || name[0] < 'a' || name[0] > 'h' || name[1] < '1' ||
      name[1] > '8')
    throw ParseError("bad square name: '" + std::string(name) + "'");
  return from_file_rank(name[0] - 'a', name[1] - '1');
}

std::string Square::name() const {
  return {static_cast<char>('a' + file()), static_cast<char>('1' + rank())};
}

Move Move::parse_uci(std::string_view text) {
  if (text.size() != 4 && text.size() != 5)
    throw ParseError("bad uci move: '" + std::string(text) + "'");
  Move m;
  m.from = Square::parse(text.substr(0, 2));
  m.to = Square::parse(text.substr(2, 2));
  if (text.size() == 5) {
    switch (text[4]) {
      case 'n': m.promotion = PieceKind::Knight; break;
      case 'b': m.promotion = PieceKind::Bishop; break;
      case 'r': m.promotion = PieceKind::Rook; break;
      case 'q': m.promotion = PieceKind::Queen; break;
      default:
        throw ParseError("bad promotion piece in '" + std::string(text) + "'");
    }
  }
  return m;
}

std::string Move::uci() const {
  std::string s = from.name() + to.name();
  if (promotion) {
    switch (*promotion) {
      case PieceKind::Knight: s += 'n'; break;
      case PieceKind::Bishop: s += 'b'; break;
      case PieceKind::Rook: s += 'r'; break;
      case PieceKind::Queen: s += 'q'; break;
      default: break;
    }
  }
  return s;
}

Position::Position() = default;

Position Position::startpos() {
  return from_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1");
}

Position Position::from_fen(std::string_view fen) {
  std::istringstream in{std::string(fen)};
  std::string placement, stm, castling, ep, halfmove, fullmove;
  in >> placement >> stm >> castling >> ep;
  if (!in || placement.empty() || stm.empty() || castling.empty() || ep.empty())
    throw ParseError("fen needs at least 4 fields: '" + std::string(fen) + "'");
  in >> halfmove >> fullmove;

  Position p;
  int file = 0, rank = 7;
  for (char ch : placement) {
    if (ch == '/') {
      if (file != 8) throw ParseError("fen placement: rank has wrong width");
      file = 0;
      --rank;
      if (rank < 0) throw ParseError("fen placement: too many ranks");
      continue;
    }
    if (ch >= '1' && ch <= '8') {
      file += ch - '0';
      if (file > 8) throw ParseError("fen placement: rank has wrong width");
      continue;
    }
    Color c = std::isupper(static_cast<unsigned char>(ch)) ? Color::White
                                                           : Color::Black;
    PieceKind k;
    switch (std::tolower(static_cast<unsigned char>(ch))) {
      case 'p': k = PieceKind::Pawn; break;
      case 'n': k = PieceKind::Knight; break;
      case 'b': k = PieceKind::Bishop; break;
      case 'r': k = PieceKind::Rook; break;
      case 'q': k = PieceKind::Queen; break;
      case 'k': k = PieceKind::King; break;
      default:
        throw ParseError(std::string("fen placement: bad piece '") + ch + "'");
    }
    if (file > 7 || rank < 0)
      throw ParseError("fen placement: square out of range");
    p.board_[Square::from_file_rank(file, rank).index()] = make_code(c, k);
    ++file;
  }
  if (rank != 0 || file != 8)
    throw ParseError("fen placement: expected 8 ranks of 8 squares");

  if (stm == "w")
    p.stm_ = Color::White;
  else if (stm == "b")
    p.stm_ = Color::Black;
  else
    throw ParseError("fen side to move: '" + stm + "'");

  if (castling != "-") {
    uint8_t seen = 0;
    for (char ch : castling) {
      uint8_t bit;
      switch (ch) {
        case 'K': bit = kWhiteKingSide; break;
        case 'Q': bit = kWhiteQueenSide; break;
        case 'k': bit = kBlackKingSide; break;
        case 'q': bit = kBlackQueenSide; break;
        default:
          throw ParseError(std::string("fen castling: bad flag '") + ch + "'");
      }
      if (seen & bit) throw ParseError("fen castling: duplicate flag");
      seen |= bit;
    }
    p.castling_ = seen;
  }

  if (ep != "-") {
    Square s = Square::parse(ep);
    const int expected_rank = p.stm_ == Color::White ? 5 : 2;
    if (s.rank() != expected_rank)
      throw ParseError("fen en passant: square '" + ep +
                       "' inconsistent with side to move");
    // The double-pushed pawn must be present.
    const int pawn_rank = p.stm_ == Color::White ? 4 : 3;
    const uint8_t enemy_pawn = make_code(opposite(p.stm_), PieceKind::Pawn);
    if (p.board_[Square::from_file_rank(s.file(), pawn_rank).index()] !=
        enemy_pawn)
      throw ParseError("fen en passant: no pawn eligible for capture");
    p.ep_file_ = static_cast<int8_t>(s.file());
  }

  if (!halfmove.empty()) {
    try {
      p.halfmove_ = std::stoi(halfmove);
    } catch (...) {
      throw ParseError("fen halfmove clock: '" + halfmove + "'");
    }
    if (p.halfmove_ < 0) throw ParseError("fen halfmove clock: negative");
  }
  if (!fullmove.empty()) {
    try {
      p.fullmove_ = std::stoi(fullmove);
    } catch (...) {
      throw ParseError("fen fullmove number: '" + fullmove + "'");
    }
    if (p.fullmove_ < 1) throw ParseError("fen fullmove number: < 1");
  }

  p.validate(fen);
  p.hash_ = p.compute_hash();
  p.keys_ = {p.hash_};
  return p;
}

void Position::validate(std::string_view fen) const {
  int kings[2] = {0, 0};
  for (int i = 0; i < 64; ++i) {
    uint8_t code = board_[i];
    if (code == kEmpty) continue;
    if (code > 12) throw ParseError("fen placement: bad piece code");
    if (code_kind(code) == PieceKind::King)
      ++kings[static_cast<int>(code_color(code))];
    if (code_kind(code) == PieceKind::Pawn) {
      int r = Square(i).rank();
      if (r == 0 || r == 7)
        throw ParseError("fen placement: pawn on back rank in '" +
                         std::string(fen) + "'");
    }
  }
  if (kings[0] != 1 || kings[1] != 1)
    throw ParseError("fen placement: each side needs exactly one king in '" +
                     std::string(fen) + "'");

  // Castling rights require king and rook on their home squares.
  struct Req {
    uint8_t bit;
    int king_sq, rook_sq;
    uint8_t king_code, rook_code;
  };
  const Req reqs[4] = {
      {kWhiteKingSide, 4, 7, make_code(Color::White, PieceKind::King),
       make_code(Color::White, PieceKind::Rook)},
      {kWhiteQueenSide, 4, 0, make_code(Color::White, PieceKind::King),
       make_code(Color::White, PieceKind::Rook)},
      {kBlackKingSide, 60, 63, make_code(Color::Black, PieceKind::King),
       make_code(Color::Black, PieceKind::Rook)},
      {kBlackQueenSide, 60, 56, make_code(Color::Black, PieceKind::King),
       make_code(Color::Black, PieceKind::Rook)},
  };
  for (const auto& r : reqs) {
    if ((castling_ & r.bit) &&
        (board_[r.king_sq] != r.king_code || board_[r.rook_sq] != r.rook_code))
      throw ParseError("fen castling: right not backed by king/rook placement");
  }

  // The side that just moved must not have left its king in check.
  Square enemy_king = find_king(board_, opposite(stm_));
  if (board_attacked(board_, enemy_king, stm_))
    throw ParseError("fen: side not to move is in check");
}

std::string Position::fen() const {
  std::string out;
  for (int rank = 7; rank >= 0; --rank) {
    int run = 0;
    for (int file = 0; file < 8; ++file) {
      uint8_t code = board_[Square::from_file_rank(file, rank).index()];
      if (code == kEmpty) {
        ++run;
        continue;
      }
      if (run) {
        out += static_cast<char>('0' + run);
        run = 0;
      }
      static const char* white = "PNBRQK";
      static const char* black = "pnbrqk";
      int k = static_cast<int>(code_kind(code));
      out += code_color(code) == Color::White ? white[k] : black[k];
    }
    if (run) out += static_cast<char>('0' + run);
    if (rank) out += '/';
  }
  out += stm_ == Color::White ? " w " : " b ";
  if (castling_ == 0) {
    out += '-';
  } else {
    if (castling_ & kWhiteKingSide) out += 'K';
    if (castling_ & kWhiteQueenSide) out += 'Q';
    if (castling_ & kBlackKingSide) out += 'k';
    if (castling_ & kBlackQueenSide) out += 'q';
  }
  out += ' ';
  if (ep_file_ >= 0) {
    out += static_cast<char>('a' + ep_file_);
    out += stm_ == Color::White ? '6' : '3';
  } else {
    out += '-';
  }
  out += ' ';
  out += std::to_string(halfmove_);
  out += ' ';
  out += std::to_string(fullmove_);
  return out;
}

std::optional<Piece> Position::piece_at(Square s) const {
  uint8_t code = board_[s.index()];
  if (code == kEmpty) return std::nullopt;
  return Piece{code_color(code), code_kind(code)};
}

bool Position::can_castle(Color c, CastleSide side) const {
  return castling_ & castle_bit(c, side);
}

uint64_t Position::compute_hash() const {
  const Zobrist& z = zobrist();
  uint64_t h = 0;
  for (int i = 0; i < 64; ++i)
    if (board_[i] != kEmpty) h ^= z.piece[board_[i]][i];
  if (stm_ == Color::Black) h ^= z.side;
  h ^= z.castling[castling_];
  if (ep_file_ >= 0) h ^= z.ep_file[ep_file_];
  return h;
}

int Position::repetition_count() const {
  return static_cast<int>(std::count(keys_.begin(), keys_.end(), hash_));
}

Square Position::king_square(Color c) const { return find_king(board_, c); }

bool Position::attacked_by(Square s, Color attacker) const {
  return board_attacked(board_, s, attacker);
}

bool Position::in_check() const {
  return board_attacked(board_, find_king(board_, stm_), opposite(stm_));
}

void Position::generate_pseudo(std::vector<Move>& out) const {
  const Color us = stm_;
  const Color them = opposite(us);
  const int forward = us == Color::White ? 1 : -1;
  const int start_rank = us == Color::White ? 1 : 6;
  const int promo_rank = us == Color::White ? 7 : 0;

  auto push = [&out](Square from, Square to) { out.push_back({from, to, {}}); };
  auto push_pawn = [&](Square from, Square to) {
    if (to.rank() == promo_rank) {
      for (PieceKind k : {PieceKind::Knight, PieceKind::Bishop, PieceKind::Rook,
                          PieceKind::Queen})
        out.push_back({from, to, k});
    } else {
      push(from, to);
    }
  };

  for (int i = 0; i < 64; ++i) {
    const uint8_t code = board_[i];
    if (code == kEmpty || code_color(code) != us) continue;
    const Square from(i);
    const int f = from.file(), r = from.rank();

    switch (code_kind(code)) {
      case PieceKind::Pawn: {
        const int r1 = r + forward;
        if (on_board(f, r1) &&
            board_[Square::from_file_rank(f, r1).index()] == kEmpty) {
          push_pawn(from, Square::from_file_rank(f, r1));
          const int r2 = r + 2 * forward;
          if (r == start_rank &&
              board_[Square::from_file_rank(f, r2).index()] == kEmpty)
            push(from, Square::from_file_rank(f, r2));
        }
        for (int df : {-1, 1}) {
          if (!on_board(f + df, r1)) continue;
          const Square to = Square::from_file_rank(f + df, r1);
          const uint8_t target = board_[to.index()];
          if (target != kEmpty && code_color(target) == them)
            push_pawn(from, to);
          // En passant: target square is empty, capture allowed by state.
          const int ep_rank = us == Color::White ? 5 : 2;
          if (ep_file_ == f + df && r1 == ep_rank && target == kEmpty)
            push(from, to);
        }
        break;
      }
      case PieceKind::Knight:
        for (const auto& d : kKnightDeltas) {
          if (!on_board(f + d[0], r + d[1])) continue;
          const Square to = Square::from_file_rank(f + d[0], r + d[1]);
          const uint8_t target = board_[to.index()];
          if (target == kEmpty || code_color(target) == them) push(from, to);
        }
        break;
      case PieceKind::King: {
        for (const auto& d : kKingDeltas) {
          if (!on_board(f + d[0], r + d[1])) continue;
          const Square to = Square::from_file_rank(f + d[0], r + d[1]);
          const uint8_t target = board_[to.index()];
          if (target == kEmpty || code_color(target) == them) push(from, to);
        }
        // Castling: rights present, path clear, king's transit not attacked.
        const int home = us == Color::White ? 0 : 7;
        if (from == Square::from_file_rank(4, home) &&
            !board_attacked(board_, from, them)) {
          if (can_castle(us, CastleSide::King) &&
              board_[Square::from_file_rank(5, home).index()] == kEmpty &&
              board_[Square::from_file_rank(6, home).index()] == kEmpty &&
              !board_attacked(board_, Square::from_file_rank(5, home), them))
            push(from, Square::from_file_rank(6, home));
          if (can_castle(us, CastleSide::Queen) &&
              board_[Square::from_file_rank(3, home).index()] == kEmpty &&
              board_[Square::from_file_rank(2, home).index()] == kEmpty &&
              board_[Square::from_file_rank(1, home).index()] == kEmpty &&
              !board_attacked(board_, Square::from_file_rank(3, home), them))
            push(from, Square::from_file_rank(2, home));
        }
        break;
      }
      default: {  // bishop, rook, queen
        const PieceKind kind = code_kind(code);
        auto slide = [&](const int dirs[][2], int n) {
          for (int d = 0; d < n; ++d) {
            int tf = f + dirs[d][0], tr = r + dirs[d][1];
            while (on_board(tf, tr)) {
              const Square to = Square::from_file_rank(tf, tr);
              const uint8_t target = board_[to.index()];
              if (target == kEmpty) {
                push(from, to);
              } else {
                if (code_color(target) == them) push(from, to);
                break;
              }
              tf += dirs[d][0];
              tr += dirs[d][1];
            }
          }
        };
        if (kind == PieceKind::Bishop || kind == PieceKind::Queen)
          slide(kBishopDirs, 4);
        if (kind == PieceKind::Rook || kind == PieceKind::Queen)
          slide(kRookDirs, 4);
        break;
      }
    }
  }
}

std::vector<Move> Position::legal_moves() const {
  std::vector<Move> pseudo;
  pseudo.reserve(64);
  generate_pseudo(pseudo);

  std::vector<Move> legal;
  legal.reserve(pseudo.size());
  for (const Move& m : pseudo) {
    Board b = board_;
    board_make(b, m, stm_);
    if (!board_attacked(b, find_king(b, stm_), opposite(stm_)))
      legal.push_back(m);
  }
  return legal;
}

bool Position::is_legal(const Move& m) const {
  const auto moves = legal_moves();
  return std::find(moves.begin(), moves.end(), m) != moves.end();
}

Position Position::apply(const Move& m) const {
  if (!is_legal(m))
    throw IllegalMoveError("illegal move " + m.uci() + " in " + fen());
  return apply_unchecked(m);
}

Position Position::apply_unchecked(const Move& m) const {
  Position next(*this);
  const uint8_t code = board_[m.from.index()];
  const PieceKind kind = code_kind(code);
  const bool is_capture =
      board_[m.to.index()] != kEmpty ||
      (kind == PieceKind::Pawn && m.from.file() != m.to.file());

  board_make(next.board_, m, stm_);

  // Castling rights: king move clears both, rook moves/captures clear one.
  auto clear_on_square = [&next](Square s) {
    switch (s.index()) {
      case 0: next.castling_ &= ~kWhiteQueenSide; break;
      case 7: next.castling_ &= ~kWhiteKingSide; break;
      case 56: next.castling_ &= ~kBlackQueenSide; break;
      case 63: next.castling_ &= ~kBlackKingSide; break;
      default: break;
    }
  };
  if (kind == PieceKind::King)
    next.castling_ &= stm_ == Color::White
                          ? ~(kWhiteKingSide | kWhiteQueenSide)
                          : ~(kBlackKingSide | kBlackQueenSide);
  clear_on_square(m.from);
  clear_on_square(m.to);

  // En passant availability only right after a double push.
  next.ep_file_ = -1;
  if (kind == PieceKind::Pawn && std::abs(m.to.rank() - m.from.rank()) == 2)
    next.ep_file_ = static_cast<int8_t>(m.from.file());

  next.halfmove_ =
      (kind == PieceKind::Pawn || is_capture) ? 0 : halfmove_ + 1;
  if (stm_ == Color::Black) ++next.fullmove_;
  next.stm_ = opposite(stm_);

  next.hash_ = next.compute_hash();
  next.keys_.push_back(next.hash_);
  return next;
}

bool Position::is_checkmate() const {
  return in_check() && legal_moves().empty();
}

bool Position::is_stalemate() const {
  return !in_check() && legal_moves().empty();
}

Position parse_fen(std::string_view text) { return Position::from_fen(text); }
std::string to_fen(const Position& p) { return p.fen(); }
std::vector<Move> legal_moves(const Position& p) { return p.legal_moves(); }
Position apply_move(const Position& p, const Move& m) { return p.apply(m); }

uint64_t perft(const Position& p, int depth) {
  if (depth <= 0) return 1;
  const auto moves = p.legal_moves();
  if (depth == 1) return moves.size();
  uint64_t nodes = 0;
  for (const Move& m : moves) nodes += perft(p.apply_unchecked(m), depth - 1);
  return nodes;
}

Position mirror_position(const Position& p) {
  Position m;
  for (int i = 0; i < 64; ++i) {
    const uint8_t code = p.board_[i];
    if (code == kEmpty) continue;
    const uint8_t flipped =
        make_code(opposite(code_color(code)), code_kind(code));
    m.board_[Square(i).mirrored().index()] = flipped;
  }
  m.stm_ = opposite(p.stm_);
  m.castling_ = static_cast<uint8_t>(((p.castling_ & 0x3) << 2) |
                                     ((p.castling_ >> 2) & 0x3));
  m.ep_file_ = p.ep_file_;
  m.halfmove_ = p.halfmove_;
  m.fullmove_ = p.fullmove_;
  m.hash_ = m.compute_hash();
  m.keys_ = {m.hash_};
  return m;
}

}  // namespace sqf::chess
