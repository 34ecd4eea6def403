#include "sqf/data/shard.hpp"

#include <sstream>

#include "sqf/common/bytes.hpp"
#include "sqf/common/error.hpp"

namespace sqf::data {

namespace {

constexpr char kMagic[] = "SQFDATA1";
constexpr uint32_t kVersion = 1;
// magic + version + history + count
constexpr std::streamoff kCountOffset = 8 + 4 + 4;

void put_move(std::string& out, const chess::Move& m) {
  put_u8(out, static_cast<uint8_t>(m.from.index()));
  put_u8(out, static_cast<uint8_t>(m.to.index()));
  put_u8(out, m.promotion
                  ? static_cast<uint8_t>(1 + static_cast<int>(*m.promotion))
                  : 0);
}

chess::Move get_move(ByteReader& r) {
  chess::Move m;
  m.from = chess::Square(r.u8());
  m.to = chess::Square(r.u8());
  uint8_t promo = r.u8();
  if (promo) m.promotion = static_cast<chess::PieceKind>(promo - 1);
  return m;
}

std::string encode(const TrainingExample& ex) {
  std::string out;
  for (const chess::CanonicalBoard& b : ex.boards)
    for (int s = 0; s < 64; ++s)
      put_u8(out, static_cast<uint8_t>(b.plane_at(chess::Square(s)) + 1));
  for (uint8_t r : ex.repetition) put_u8(out, r);
  uint8_t castle = 0;
  for (int i = 0; i < 4; ++i)
    if (ex.castling[i]) castle |= 1 << i;
  put_u8(out, castle);
  put_u8(out, ex.black_to_move ? 1 : 0);
  put_u16(out, static_cast<uint16_t>(ex.halfmove_clock));
  put_u16(out, static_cast<uint16_t>(ex.active_rating));
  put_u16(out, static_cast<uint16_t>(ex.opponent_rating));
  put_move(out, ex.target_move);
  put_u8(out, static_cast<uint8_t>(ex.target_outcome));
  put_u32(out, static_cast<uint32_t>(ex.ply));
  put_u16(out, static_cast<uint16_t>(ex.legal.size()));
  for (const chess::Move& m : ex.legal) put_move(out, m);
  put_u32(out, static_cast<uint32_t>(ex.soft_target.size()));
  for (float v : ex.soft_target) put_f32(out, v);
  return out;
}

TrainingExample decode(const std::string& payload, int history) {
  ByteReader r(payload);
  TrainingExample ex;
  ex.boards.resize(history + 1);
  for (chess::CanonicalBoard& b : ex.boards)
    for (int s = 0; s < 64; ++s)
      b.set_plane(chess::Square(s), static_cast<int>(r.u8()) - 1);
  ex.repetition.resize(history + 1);
  for (uint8_t& v : ex.repetition) v = r.u8();
  uint8_t castle = r.u8();
  for (int i = 0; i < 4; ++i) ex.castling[i] = (castle >> i) & 1;
  ex.black_to_move = r.u8() != 0;
  ex.halfmove_clock = r.u16();
  ex.active_rating = r.u16();
  ex.opponent_rating = r.u16();
  ex.target_move = get_move(r);
  ex.target_outcome = static_cast<Outcome>(r.u8());
  ex.ply = static_cast<int>(r.u32());
  ex.legal.resize(r.u16());
  for (chess::Move& m : ex.legal) m = get_move(r);
  ex.soft_target.resize(r.u32());
  for (float& v : ex.soft_target) v = r.f32();
  if (!r.done()) throw ParseError("shard: trailing bytes in record");
  return ex;
}

}  // namespace

ShardWriter::ShardWriter(const std::filesystem::path& path, int history)
    : out_(path, std::ios::binary), history_(history) {
  if (!out_) throw IoError("shard: cannot open " + path.string());
  std::string header;
  header.append(kMagic, 8);
  put_u32(header, kVersion);
  put_u32(header, static_cast<uint32_t>(history));
  put_u64(header, 0);  // count, patched by close()
  out_.write(header.data(), static_cast<std::streamsize>(header.size()));
}

ShardWriter::~ShardWriter() {
  if (open_) close();
}

void ShardWriter::add(const TrainingExample& ex) {
  if (!open_) throw IoError("shard: add() after close()");
  if (ex.history() != history_)
    throw ShapeError("shard: example history " +
                     std::to_string(ex.history()) + " != shard history " +
                     std::to_string(history_));
  const std::string payload = encode(ex);
  std::string rec;
  put_u32(rec, static_cast<uint32_t>(payload.size()));
  out_.write(rec.data(), static_cast<std::streamsize>(rec.size()));
  out_.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out_) throw IoError("shard: write failed");
  ++count_;
}

void ShardWriter::close() {
  if (!open_) return;
  open_ = false;
  out_.seekp(kCountOffset);
  std::string buf;
  put_u64(buf, count_);
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  out_.close();
  if (!out_) throw IoError("shard: close failed");
}

ShardReader::ShardReader(const std::filesystem::path& path)
    : in_(path, std::ios::binary) {
  if (!in_) throw IoError("shard: cannot open " + path.string());
  char magic[8];
  in_.read(magic, 8);
  if (!in_ || std::string(magic, 8) != std::string(kMagic, 8))
    throw ParseError("shard: bad magic in " + path.string());
  std::string rest(4 + 4 + 8, '\0');
  in_.read(rest.data(), static_cast<std::streamsize>(rest.size()));
  if (!in_) throw ParseError("shard: truncated header in " + path.string());
  ByteReader r(rest);
  const uint32_t version = r.u32();
  if (version != kVersion)
    throw ParseError("shard: unsupported version " + std::to_string(version));
  history_ = static_cast<int>(r.u32());
  count_ = r.u64();
}

std::optional<TrainingExample> ShardReader::next() {
  if (read_ == count_) return std::nullopt;
  std::string len(4, '\0');
  in_.read(len.data(), 4);
  if (!in_) throw ParseError("shard: truncated record length");
  ByteReader lr(len);
  std::string payload(lr.u32(), '\0');
  in_.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!in_) throw ParseError("shard: truncated record");
  ++read_;
  return decode(payload, history_);
}

std::vector<TrainingExample> read_shard(const std::filesystem::path& path) {
  ShardReader reader(path);
  std::vector<TrainingExample> out;
  out.reserve(reader.count());
  while (auto ex = reader.next()) out.push_back(std::move(*ex));
  return out;
}

void write_manifest(
    const std::filesystem::path& manifest,
    const std::vector<std::pair<std::string, uint64_t>>& shards) {
  std::ofstream out(manifest);
  if (!out) throw IoError("manifest: cannot open " + manifest.string());
  for (const auto& [path, count] : shards) out << path << '\t' << count << '\n';
  if (!out) throw IoError("manifest: write failed");
}

std::vector<std::pair<std::string, uint64_t>> read_manifest(
    const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError("manifest: cannot open " + manifest.string());
  std::vector<std::pair<std::string, uint64_t>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError("manifest: malformed line: " + line);
    out.emplace_back(line.substr(0, tab),
                     std::stoull(line.substr(tab + 1)));
  }
  return out;
}

}  // namespace sqf::data
