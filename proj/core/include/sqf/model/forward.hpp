#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "sqf/data/example.hpp"
#include "sqf/model/model.hpp"
#include "sqf/model/params.hpp"
#include "sqf/model/policy_space.hpp"
#include "sqf/nn/autograd.hpp"

namespace sqf::model {

// Registry tensors staged onto one tape, addressable by name.
template <typename T>
struct TapeParams {
  const Parameters* src = nullptr;
  std::vector<nn::Var<T>> vars;

  nn::Var<T> operator()(const std::string& name) const {
    return vars[src->index_of(name)];
  }
};

template <typename T>
TapeParams<T> stage_parameters(nn::Tape<T>& tape, const Parameters& params,
                               bool trainable) {
  TapeParams<T> tp;
  tp.src = &params;
  tp.vars.reserve(params.count());
  for (int i = 0; i < params.count(); ++i) {
    const NamedTensor& t = params.tensor(i);
    tp.vars.push_back(tape.leaf(
        t.shape, std::vector<T>(t.data.begin(), t.data.end()), trainable));
  }
  return tp;
}

// Board feature planes as a (B*64, board_depth) constant; token t of example
// b sits at row b*64 + t.
template <typename T>
nn::Var<T> board_planes(nn::Tape<T>& tape, const ModelConfig& cfg,
                        std::span<const data::TrainingExample> batch) {
  const int B = static_cast<int>(batch.size());
  const int n = cfg.history;
  const int depth = cfg.board_depth();
  std::vector<T> buf(static_cast<size_t>(B) * 64 * depth, T(0));
  for (int b = 0; b < B; ++b) {
    const data::TrainingExample& ex = batch[b];
    if (ex.history() != n)
      throw ShapeError("input stack length " +
                       std::to_string(ex.boards.size()) + " but history " +
                       std::to_string(n) + " needs " + std::to_string(n + 1));
    for (int t = 0; t < 64; ++t) {
      T* row = buf.data() + (static_cast<size_t>(b) * 64 + t) * depth;
      for (int i = 0; i <= n; ++i) {
        const int p = ex.boards[i].plane_at(chess::Square(t));
        if (p >= 0) row[i * 12 + p] = T(1);
      }
      if (cfg.mode == Mode::Engine) {
        T* extra = row + 12 * (n + 1);
        for (int i = 0; i <= n; ++i)
          extra[i] = ex.repetition[i] ? T(1) : T(0);
        for (int c = 0; c < 4; ++c)
          extra[(n + 1) + c] = ex.castling[c] ? T(1) : T(0);
        extra[(n + 1) + 4] = ex.black_to_move ? T(1) : T(0);
        extra[(n + 1) + 5] = T(ex.halfmove_clock) / T(100);
        extra[(n + 1) + 6] = T(0);
        extra[(n + 1) + 7] = T(1);
      }
    }
  }
  return tape.constant({B * 64, depth}, std::move(buf));
}

// (B, 2) interpolation weights (gamma, 1-gamma) against the weak/strong
// embedding pair; gamma = (5000 - rating)/5000, rating clamped to [0, 5000].
template <typename T>
nn::Var<T> rating_mix(nn::Tape<T>& tape,
                      std::span<const data::TrainingExample> batch,
                      bool opponent) {
  const int B = static_cast<int>(batch.size());
  std::vector<T> buf(static_cast<size_t>(B) * 2);
  for (int b = 0; b < B; ++b) {
    int k = opponent ? batch[b].opponent_rating : batch[b].active_rating;
    k = std::min(std::max(k, 0), 5000);
    const T gamma = T(5000 - k) / T(5000);
    buf[b * 2] = gamma;
    buf[b * 2 + 1] = T(1) - gamma;
  }
  return tape.constant({B, 2}, std::move(buf));
}

// Per-token input features: board planes, plus in human mode the two rating
// embeddings repeated onto every token.
template <typename T>
nn::Var<T> assemble_input(nn::Tape<T>& tape, const TapeParams<T>& tp,
                          const ModelConfig& cfg,
                          std::span<const data::TrainingExample> batch) {
  auto planes = board_planes(tape, cfg, batch);
  if (cfg.mode == Mode::Engine) return planes;
  const int E = ModelConfig::kRatingEmbedDim;
  auto stack = tape.concat({tape.reshape(tp("rating.weak"), {1, E}),
                            tape.reshape(tp("rating.strong"), {1, E})},
                           0);
  auto active = tape.matmul(rating_mix<T>(tape, batch, false), stack);
  auto opponent = tape.matmul(rating_mix<T>(tape, batch, true), stack);
  auto embed = tape.concat({active, opponent}, 1);       // (B, 2E)
  return tape.concat({planes, tape.repeat_rows(embed, 64)}, 1);
}

// Geometric attention bias from this layer's input tokens, flattened to
// (B*heads*64, 64) rows aligned with the attention logits.
template <typename T>
nn::Var<T> gab_bias_rows(nn::Tape<T>& tape, const TapeParams<T>& tp,
                         const ModelConfig& cfg, nn::Var<T> x, int B) {
  nn::Var<T> y;
  if (cfg.posenc == PosEnc::Gab) {
    auto y1 = tape.add_bias(tape.matmul(x, tp("gab.sm1.w")), tp("gab.sm1.b"));
    y = tape.reshape(y1, {B, 64 * cfg.gab_d1});
  } else {
    y = tape.mean_rows_grouped(x, 64);  // (B, D)
  }
  y = tape.gelu(tape.add_bias(tape.matmul(y, tp("gab.sm2.w")), tp("gab.sm2.b")));
  y = tape.layer_norm_rows(y, tp("gab.ln1.g"), tp("gab.ln1.b"));
  y = tape.gelu(tape.add_bias(tape.matmul(y, tp("gab.sm3.w")), tp("gab.sm3.b")));
  y = tape.layer_norm_rows(y, tp("gab.ln2.g"), tp("gab.ln2.b"));
  auto per_head = tape.reshape(y, {B * cfg.heads(), cfg.gab_d3});
  auto bias = tape.matmul(per_head, tape.transpose(tp("gab.posenc")));
  return tape.reshape(bias, {B * cfg.heads() * 64, 64});
}

// Static relative-displacement bias, one (64, 64) table per head, gathered
// from the (h, 15, 15) parameter and tiled across the batch.
template <typename T>
nn::Var<T> relative_bias_rows(nn::Tape<T>& tape, const TapeParams<T>& tp,
                              const ModelConfig& cfg, int B) {
  const int h = cfg.heads();
  std::vector<int64_t> idx(static_cast<size_t>(h) * 64 * 64);
  size_t at = 0;
  for (int hh = 0; hh < h; ++hh)
    for (int q = 0; q < 64; ++q)
      for (int k = 0; k < 64; ++k) {
        const int dr = k / 8 - q / 8 + 7;
        const int df = k % 8 - q % 8 + 7;
        idx[at++] = (static_cast<int64_t>(hh) * 15 + dr) * 15 + df;
      }
  auto rows = tape.reshape(tape.gather(tp("posenc.rel"), std::move(idx)),
                           {h * 64, 64});
  return tape.tile_rows(rows, B);
}

namespace detail {

template <typename T>
void capture(std::vector<float>& dst, const nn::Var<T>& v) {
  const auto& val = v.value();
  dst.assign(val.begin(), val.end());
}

}  // namespace detail

// Pre-norm transformer stack over (B*64, D) tokens; per head the attention
// logits are QK^T/sqrt(32) plus the configured position bias. GAB biases are
// regenerated each layer from that layer's incoming residual stream.
template <typename T>
nn::Var<T> encoder_forward(nn::Tape<T>& tape, const TapeParams<T>& tp,
                           const ModelConfig& cfg, nn::Var<T> x, int B,
                           AttentionTrace* trace = nullptr) {
  const int h = cfg.heads();
  const T inv_sqrt_d = T(1) / std::sqrt(T(ModelConfig::kHeadDim));
  if (trace) {
    if (B != 1) throw ShapeError("attention trace needs a single position");
    trace->layers = cfg.layers;
    trace->heads = h;
    trace->layer.assign(cfg.layers, {});
  }

  if (cfg.posenc == PosEnc::Absolute)
    x = tape.add(x, tape.tile_rows(tp("posenc.abs"), B));
  nn::Var<T> rel;
  if (cfg.posenc == PosEnc::Relative2d)
    rel = relative_bias_rows<T>(tape, tp, cfg, B);

  for (int l = 0; l < cfg.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    nn::Var<T> bias;
    if (cfg.uses_gab()) bias = gab_bias_rows<T>(tape, tp, cfg, x, B);
    else if (cfg.posenc == PosEnc::Relative2d) bias = rel;

    auto x1 = tape.layer_norm_rows(x, tp(p + "ln1.g"), tp(p + "ln1.b"));
    auto q = tape.add_bias(tape.matmul(x1, tp(p + "attn.wq")), tp(p + "attn.bq"));
    auto k = tape.add_bias(tape.matmul(x1, tp(p + "attn.wk")), tp(p + "attn.bk"));
    auto v = tape.add_bias(tape.matmul(x1, tp(p + "attn.wv")), tp(p + "attn.bv"));
    auto q3 = tape.reshape(tape.split_heads(q, B, h),
                           {B * h, 64, ModelConfig::kHeadDim});
    auto k3 = tape.reshape(tape.split_heads(k, B, h),
                           {B * h, 64, ModelConfig::kHeadDim});
    auto v3 = tape.reshape(tape.split_heads(v, B, h),
                           {B * h, 64, ModelConfig::kHeadDim});
    auto dpa = tape.reshape(
        tape.scale(tape.batched_matmul(q3, tape.transpose_batched(k3)),
                   inv_sqrt_d),
        {B * h * 64, 64});
    auto logits = bias.tape ? tape.add(dpa, bias) : dpa;
    auto w = tape.softmax_rows(logits);
    if (trace) {
      AttentionTrace::Layer& tl = trace->layer[l];
      if (cfg.uses_gab()) {
        detail::capture(tl.dpa_logits, dpa);
        detail::capture(tl.gab_bias, bias);
      } else {
        // Static biases fold into the dot-product term of the trace.
        detail::capture(tl.dpa_logits, logits);
        tl.gab_bias.assign(static_cast<size_t>(h) * 64 * 64, 0.0f);
      }
      detail::capture(tl.weights, w);
    }
    auto mixed = tape.batched_matmul(tape.reshape(w, {B * h, 64, 64}), v3);
    auto merged = tape.merge_heads(
        tape.reshape(mixed, {B * h * 64, ModelConfig::kHeadDim}), B, h);
    auto o = tape.add_bias(tape.matmul(merged, tp(p + "attn.wo")),
                           tp(p + "attn.bo"));
    x = tape.add(x, o);

    auto x2 = tape.layer_norm_rows(x, tp(p + "ln2.g"), tp(p + "ln2.b"));
    auto m1 = tape.gelu(
        tape.add_bias(tape.matmul(x2, tp(p + "mlp.w1")), tp(p + "mlp.b1")));
    auto m2 = tape.add_bias(tape.matmul(m1, tp(p + "mlp.w2")), tp(p + "mlp.b2"));
    x = tape.add(x, m2);
  }
  return tape.layer_norm_rows(x, tp("final_ln.g"), tp("final_ln.b"));
}

// From-to policy scores over the canonical column space: (B, kPolicyColumns).
// Promotion columns add the promotion projection of the destination key to
// the underlying from-to score.
template <typename T>
nn::Var<T> policy_forward(nn::Tape<T>& tape, const TapeParams<T>& tp,
                          const ModelConfig& cfg, nn::Var<T> tokens, int B) {
  const int D = cfg.embed_dim;
  auto q = tape.add_bias(tape.matmul(tokens, tp("policy.wq")), tp("policy.bq"));
  auto k = tape.add_bias(tape.matmul(tokens, tp("policy.wk")), tp("policy.bk"));
  auto base = tape.scale(
      tape.batched_matmul(tape.reshape(q, {B, 64, D}),
                          tape.transpose_batched(tape.reshape(k, {B, 64, D}))),
      T(1) / std::sqrt(T(D)));
  auto base_flat = tape.reshape(base, {B, kBaseColumns});

  // Keys of the promotion rank (squares 56..63), per example.
  std::vector<int64_t> kidx(static_cast<size_t>(B) * 8 * D);
  size_t at = 0;
  for (int b = 0; b < B; ++b)
    for (int f = 0; f < 8; ++f)
      for (int c = 0; c < D; ++c)
        kidx[at++] = (static_cast<int64_t>(b) * 64 + 56 + f) * D + c;
  auto last_rank = tape.reshape(tape.gather(k, std::move(kidx)), {B * 8, D});
  auto promo_add = tape.add_bias(tape.matmul(last_rank, tp("promo.w")),
                                 tp("promo.b"));  // (B*8, 4)

  std::vector<int64_t> bidx(static_cast<size_t>(B) * kPromoColumns);
  std::vector<int64_t> pidx(bidx.size());
  at = 0;
  for (int b = 0; b < B; ++b)
    for (int ff = 0; ff < 8; ++ff)
      for (int tf = std::max(0, ff - 1); tf <= std::min(7, ff + 1); ++tf)
        for (int pc = 0; pc < kPromoPieces; ++pc, ++at) {
          bidx[at] = static_cast<int64_t>(b) * kBaseColumns +
                     (48 + ff) * 64 + (56 + tf);
          pidx[at] = (static_cast<int64_t>(b) * 8 + tf) * 4 + pc;
        }
  auto promo =
      tape.add(tape.reshape(tape.gather(base_flat, std::move(bidx)),
                            {B, kPromoColumns}),
               tape.reshape(tape.gather(promo_add, std::move(pidx)),
                            {B, kPromoColumns}));
  return tape.concat({base_flat, promo}, 1);
}

// Win/draw/loss logits: (B, 3).
template <typename T>
nn::Var<T> value_forward(nn::Tape<T>& tape, const TapeParams<T>& tp,
                         nn::Var<T> tokens) {
  auto pooled = tape.mean_rows_grouped(tokens, 64);
  auto normed = tape.layer_norm_rows(pooled, tp("value.ln.g"), tp("value.ln.b"));
  auto hidden = tape.relu(
      tape.add_bias(tape.matmul(normed, tp("value.w1")), tp("value.b1")));
  return tape.add_bias(tape.matmul(hidden, tp("value.w2")), tp("value.b2"));
}

template <typename T>
struct ForwardResult {
  nn::Var<T> policy;  // (B, kPolicyColumns)
  nn::Var<T> value;   // (B, 3)
};

template <typename T>
ForwardResult<T> model_forward(nn::Tape<T>& tape, const TapeParams<T>& tp,
                               const ModelConfig& cfg,
                               std::span<const data::TrainingExample> batch,
                               AttentionTrace* trace = nullptr) {
  const int B = static_cast<int>(batch.size());
  auto features = assemble_input<T>(tape, tp, cfg, batch);
  auto x = tape.add_bias(tape.matmul(features, tp("input.w")), tp("input.b"));
  auto tokens = encoder_forward<T>(tape, tp, cfg, x, B, trace);
  return {policy_forward<T>(tape, tp, cfg, tokens, B),
          value_forward<T>(tape, tp, tokens)};
}

}  // namespace sqf::model
