#include "sqf/model/model.hpp"

namespace sqf::model {

// Forward-pass FLOPs for one position, counting each multiply-add as 2 and
// charging only matrix products (norms, softmax, activations and bias adds
// are linear-time noise by comparison):
//   input projection        2 * 64 * input_depth * D
//   per layer
//     Q,K,V,O projections   4 * 2 * 64 * D * D
//     attention logits      2 * 64 * 64 * D   (h heads of 64x64x32 each)
//     attention mixing      2 * 64 * 64 * D
//     MLP                   2 * 64 * D * mlp + 2 * 64 * mlp * D
//     GAB generator         sm1 2*64*D*d1 (full) or pool 64*D (pooled),
//                           sm2 2*in2*d2, sm3 2*d2*h*d3, table 2*h*d3*4096
//   rating mix (human)      2 * 2 * 2 * 128
//   policy head             2 * 2 * 64 * D * D + 2 * 64 * 64 * D + 2*8*D*4
//   value head              64 * D + 2 * D * 128 + 2 * 128 * 3
int64_t count_flops(const ModelConfig& cfg) {
  const int64_t D = cfg.embed_dim;
  const int64_t h = cfg.heads();
  const int64_t mlp = cfg.mlp_dim();

  int64_t total = 2 * 64 * static_cast<int64_t>(cfg.input_depth()) * D;

  int64_t per_layer = 4 * 2 * 64 * D * D;  // QKV and output projections
  per_layer += 2 * 64 * 64 * D;            // logits
  per_layer += 2 * 64 * 64 * D;            // weighted value mix
  per_layer += 2 * 64 * D * mlp + 2 * 64 * mlp * D;
  if (cfg.uses_gab()) {
    int64_t gab = 0;
    int64_t in2;
    if (cfg.posenc == PosEnc::Gab) {
      gab += 2 * 64 * D * cfg.gab_d1;
      in2 = 64 * cfg.gab_d1;
    } else {
      gab += 64 * D;  // token mean
      in2 = D;
    }
    gab += 2 * in2 * cfg.gab_d2;
    gab += 2 * cfg.gab_d2 * h * cfg.gab_d3;
    gab += 2 * h * cfg.gab_d3 * 64 * 64;
    per_layer += gab;
  }
  total += cfg.layers * per_layer;

  if (cfg.mode == Mode::Human) total += 2 * 2 * 2 * 128;

  total += 2 * 2 * 64 * D * D;  // policy Q, K projections
  total += 2 * 64 * 64 * D;     // from-to scores
  total += 2 * 8 * D * 4;       // promotion projection
  total += 64 * D + 2 * D * 128 + 2 * 128 * 3;
  return total;
}

}  // namespace sqf::model
