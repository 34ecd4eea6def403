#include "sqf/model/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "sqf/common/error.hpp"

namespace sqf::model {

namespace {

// Little-endian on disk regardless of host.
constexpr char kMagic[8] = {'S', 'Q', 'F', 'M', 'O', 'D', 'L', '1'};

void put_u32(std::ostream& os, uint32_t v) {
  const char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8),
                     static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
  os.write(b, 4);
}

void put_string(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_f32(std::ostream& os, const std::vector<float>& data) {
  for (float f : data) {
    uint32_t v;
    std::memcpy(&v, &f, 4);
    put_u32(os, v);
  }
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw ParseError("checkpoint: truncated file");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

std::string get_string(std::istream& is) {
  const uint32_t len = get_u32(is);
  std::string s(len, '\0');
  is.read(s.data(), len);
  if (!is) throw ParseError("checkpoint: truncated string");
  return s;
}

void put_tensor(std::ostream& os, const NamedTensor& t) {
  put_string(os, t.name);
  put_u32(os, static_cast<uint32_t>(t.shape.size()));
  for (int e : t.shape) put_u32(os, static_cast<uint32_t>(e));
  put_f32(os, t.data);
}

NamedTensor get_tensor(std::istream& is) {
  NamedTensor t;
  t.name = get_string(is);
  const uint32_t rank = get_u32(is);
  if (rank > 8) throw ParseError("checkpoint: tensor rank " +
                                 std::to_string(rank) + " out of range");
  t.shape.resize(rank);
  for (uint32_t i = 0; i < rank; ++i)
    t.shape[i] = static_cast<int>(get_u32(is));
  t.data.resize(nn::numel(t.shape));
  for (float& f : t.data) {
    const uint32_t v = get_u32(is);
    std::memcpy(&f, &v, 4);
  }
  return t;
}

}  // namespace

void save_checkpoint(const std::string& path, const Parameters& params,
                     const CheckpointExtra* extra) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("checkpoint: cannot write " + path);
  os.write(kMagic, sizeof(kMagic));
  put_string(os, params.config().to_text());

  const size_t meta_count = extra ? extra->meta.size() : 0;
  put_u32(os, static_cast<uint32_t>(meta_count));
  if (extra)
    for (const auto& [key, val] : extra->meta) {
      put_string(os, key);
      put_string(os, val);
    }

  const int extra_count = extra ? static_cast<int>(extra->tensors.size()) : 0;
  put_u32(os, static_cast<uint32_t>(params.count() + extra_count));
  for (int i = 0; i < params.count(); ++i) put_tensor(os, params.tensor(i));
  if (extra)
    for (const NamedTensor& t : extra->tensors) put_tensor(os, t);
  if (!os) throw IoError("checkpoint: write failed for " + path);
}

Parameters load_checkpoint(const std::string& path, CheckpointExtra* extra) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("checkpoint: cannot read " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw ParseError("checkpoint: bad magic in " + path);

  const ModelConfig cfg = ModelConfig::from_text(get_string(is));
  Parameters params = Parameters::zeros_like(cfg);
  if (extra) {
    extra->tensors.clear();
    extra->meta.clear();
  }

  const uint32_t meta_count = get_u32(is);
  for (uint32_t i = 0; i < meta_count; ++i) {
    std::string key = get_string(is);
    std::string val = get_string(is);
    if (extra) extra->meta.emplace(std::move(key), std::move(val));
  }

  const uint32_t tensor_count = get_u32(is);
  std::vector<bool> seen(params.count(), false);
  for (uint32_t i = 0; i < tensor_count; ++i) {
    NamedTensor t = get_tensor(is);
    if (params.has(t.name)) {
      NamedTensor& dst = params.at(t.name);
      if (dst.shape != t.shape)
        throw ShapeError("checkpoint: tensor '" + t.name + "' stored as " +
                         nn::shape_str(t.shape) + " but registry needs " +
                         nn::shape_str(dst.shape));
      dst.data = std::move(t.data);
      seen[params.index_of(t.name)] = true;
    } else if (extra) {
      extra->tensors.push_back(std::move(t));
    }
  }
  for (int i = 0; i < params.count(); ++i)
    if (!seen[i])
      throw ParseError("checkpoint: missing tensor '" +
                       params.tensor(i).name + "'");
  return params;
}

}  // namespace sqf::model
