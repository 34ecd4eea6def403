#include "sqf/model/config.hpp"

#include <sstream>

#include "sqf/common/error.hpp"

namespace sqf::model {

const char* to_string(Mode m) {
  return m == Mode::Human ? "human" : "engine";
}

const char* to_string(PosEnc p) {
  switch (p) {
    case PosEnc::Absolute: return "absolute";
    case PosEnc::Relative2d: return "relative2d";
    case PosEnc::Gab: return "gab";
    case PosEnc::GabPooled: return "gab_pooled";
  }
  return "gab";
}

Mode mode_from_string(const std::string& s) {
  if (s == "human") return Mode::Human;
  if (s == "engine") return Mode::Engine;
  throw ParseError("unknown mode '" + s + "'");
}

PosEnc posenc_from_string(const std::string& s) {
  if (s == "absolute") return PosEnc::Absolute;
  if (s == "relative2d") return PosEnc::Relative2d;
  if (s == "gab") return PosEnc::Gab;
  if (s == "gab_pooled") return PosEnc::GabPooled;
  throw ParseError("unknown posenc '" + s + "'");
}

int ModelConfig::board_depth() const {
  const int stacks = 12 * (history + 1);
  if (mode == Mode::Human) return stacks;
  // Engine layout: boards, per-slot repetition flags, castling, black to
  // move, halfmove clock / 100, constant 0, constant 1.
  return stacks + (history + 1) + 4 + 1 + 1 + 2;
}

int ModelConfig::input_depth() const {
  return board_depth() + (mode == Mode::Human ? 2 * kRatingEmbedDim : 0);
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw ShapeError("config: " + what); };
  if (layers <= 0) fail("layers must be positive");
  if (embed_dim <= 0 || embed_dim % kHeadDim != 0)
    fail("embed_dim must be a positive multiple of " +
         std::to_string(kHeadDim));
  if (mlp_expansion <= 0) fail("mlp_expansion must be positive");
  if (history < 0) fail("history must be non-negative");
  if (uses_gab() && (gab_d1 <= 0 || gab_d2 <= 0 || gab_d3 <= 0))
    fail("gab dims must be positive for gab position encodings");
}

std::string ModelConfig::to_text() const {
  std::ostringstream os;
  os << "mode=" << to_string(mode) << '\n'
     << "posenc=" << to_string(posenc) << '\n'
     << "layers=" << layers << '\n'
     << "embed_dim=" << embed_dim << '\n'
     << "mlp_expansion=" << mlp_expansion << '\n'
     << "history=" << history << '\n'
     << "gab_d1=" << gab_d1 << '\n'
     << "gab_d2=" << gab_d2 << '\n'
     << "gab_d3=" << gab_d3 << '\n';
  return os.str();
}

ModelConfig ModelConfig::from_text(const std::string& text) {
  ModelConfig cfg;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line missing '=': " + line);
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    if (key == "mode") cfg.mode = mode_from_string(val);
    else if (key == "posenc") cfg.posenc = posenc_from_string(val);
    else if (key == "layers") cfg.layers = std::stoi(val);
    else if (key == "embed_dim") cfg.embed_dim = std::stoi(val);
    else if (key == "mlp_expansion") cfg.mlp_expansion = std::stoi(val);
    else if (key == "history") cfg.history = std::stoi(val);
    else if (key == "gab_d1") cfg.gab_d1 = std::stoi(val);
    else if (key == "gab_d2") cfg.gab_d2 = std::stoi(val);
    else if (key == "gab_d3") cfg.gab_d3 = std::stoi(val);
    else throw ParseError("unknown config key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

}  // namespace sqf::model
