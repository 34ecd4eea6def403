#pragma once

#include <string>

namespace sqf::model {

enum class Mode { Human, Engine };

enum class PosEnc { Absolute, Relative2d, Gab, GabPooled };

const char* to_string(Mode m);
const char* to_string(PosEnc p);
Mode mode_from_string(const std::string& s);
PosEnc posenc_from_string(const std::string& s);

struct ModelConfig {
  static constexpr int kHeadDim = 32;
  static constexpr int kRatingEmbedDim = 128;

  int layers = 8;
  int embed_dim = 256;
  int mlp_expansion = 2;
  int history = 7;  // n past boards kept alongside the current one
  Mode mode = Mode::Human;
  PosEnc posenc = PosEnc::Gab;
  int gab_d1 = 8;
  int gab_d2 = 32;
  int gab_d3 = 32;

  int heads() const { return embed_dim / kHeadDim; }
  int mlp_dim() const { return mlp_expansion * embed_dim; }
  bool uses_gab() const {
    return posenc == PosEnc::Gab || posenc == PosEnc::GabPooled;
  }

  // Per-token feature depth before the input projection.
  int board_depth() const;
  int input_depth() const;

  void validate() const;  // throws ShapeError naming the offending field

  // Canonical key=value text; to_text(from_text(s)) is byte-identical.
  std::string to_text() const;
  static ModelConfig from_text(const std::string& text);

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace sqf::model
