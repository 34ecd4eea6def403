#include "sqf/model/params.hpp"

#include "sqf/common/error.hpp"

namespace sqf::model {

namespace {

bool is_projection(const std::string& name) {
  const size_t dot = name.rfind('.');
  const std::string leaf = dot == std::string::npos ? name : name.substr(dot + 1);
  return leaf == "w" || leaf == "w1" || leaf == "w2" || leaf == "wq" ||
         leaf == "wk" || leaf == "wv" || leaf == "wo" || leaf == "weak" ||
         leaf == "strong";
}

bool is_norm_gain(const std::string& name) {
  return name.size() >= 2 && name.compare(name.size() - 2, 2, ".g") == 0;
}

}  // namespace

Parameters::Parameters(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  build_registry();
}

Parameters::Parameters(const ModelConfig& cfg, uint64_t seed)
    : Parameters(cfg) {
  Rng rng(seed);
  for (NamedTensor& t : tensors_) {
    if (is_norm_gain(t.name)) {
      std::fill(t.data.begin(), t.data.end(), 1.0f);
    } else if (is_projection(t.name)) {
      for (float& v : t.data)
        v = static_cast<float>(rng.truncated_normal(0.02));
    }
    // Biases and the position encoding tables stay zero.
  }
}

Parameters Parameters::zeros_like(const ModelConfig& cfg) {
  return Parameters(cfg);
}

int Parameters::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw ShapeError("parameters: no tensor named '" + name + "'");
  return it->second;
}

int64_t Parameters::total_elements() const {
  int64_t n = 0;
  for (const NamedTensor& t : tensors_) n += t.size();
  return n;
}

void Parameters::register_tensor(std::string name, nn::Shape shape) {
  if (index_.count(name))
    throw ShapeError("parameters: duplicate tensor '" + name + "'");
  NamedTensor t;
  t.name = std::move(name);
  t.data.assign(nn::numel(shape), 0.0f);
  t.shape = std::move(shape);
  index_[t.name] = static_cast<int>(tensors_.size());
  tensors_.push_back(std::move(t));
}

void Parameters::build_registry() {
  const int D = cfg_.embed_dim;
  const int h = cfg_.heads();
  const int M = cfg_.mlp_dim();

  register_tensor("input.w", {cfg_.input_depth(), D});
  register_tensor("input.b", {D});

  switch (cfg_.posenc) {
    case PosEnc::Absolute:
      register_tensor("posenc.abs", {64, D});
      break;
    case PosEnc::Relative2d:
      register_tensor("posenc.rel", {h, 15, 15});
      break;
    case PosEnc::Gab:
    case PosEnc::GabPooled:
      if (cfg_.posenc == PosEnc::Gab) {
        register_tensor("gab.sm1.w", {D, cfg_.gab_d1});
        register_tensor("gab.sm1.b", {cfg_.gab_d1});
        register_tensor("gab.sm2.w", {64 * cfg_.gab_d1, cfg_.gab_d2});
      } else {
        // Pooled variant feeds the token mean straight into sm2.
        register_tensor("gab.sm2.w", {D, cfg_.gab_d2});
      }
      register_tensor("gab.sm2.b", {cfg_.gab_d2});
      register_tensor("gab.ln1.g", {cfg_.gab_d2});
      register_tensor("gab.ln1.b", {cfg_.gab_d2});
      register_tensor("gab.sm3.w", {cfg_.gab_d2, h * cfg_.gab_d3});
      register_tensor("gab.sm3.b", {h * cfg_.gab_d3});
      register_tensor("gab.ln2.g", {h * cfg_.gab_d3});
      register_tensor("gab.ln2.b", {h * cfg_.gab_d3});
      // One table for the whole model; every layer's bias goes through it.
      register_tensor("gab.posenc", {64 * 64, cfg_.gab_d3});
      break;
  }

  for (int l = 0; l < cfg_.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    register_tensor(p + "ln1.g", {D});
    register_tensor(p + "ln1.b", {D});
    register_tensor(p + "attn.wq", {D, D});
    register_tensor(p + "attn.bq", {D});
    register_tensor(p + "attn.wk", {D, D});
    register_tensor(p + "attn.bk", {D});
    register_tensor(p + "attn.wv", {D, D});
    register_tensor(p + "attn.bv", {D});
    register_tensor(p + "attn.wo", {D, D});
    register_tensor(p + "attn.bo", {D});
    register_tensor(p + "ln2.g", {D});
    register_tensor(p + "ln2.b", {D});
    register_tensor(p + "mlp.w1", {D, M});
    register_tensor(p + "mlp.b1", {M});
    register_tensor(p + "mlp.w2", {M, D});
    register_tensor(p + "mlp.b2", {D});
  }

  register_tensor("final_ln.g", {D});
  register_tensor("final_ln.b", {D});

  if (cfg_.mode == Mode::Human) {
    register_tensor("rating.weak", {ModelConfig::kRatingEmbedDim});
    register_tensor("rating.strong", {ModelConfig::kRatingEmbedDim});
  }

  register_tensor("policy.wq", {D, D});
  register_tensor("policy.bq", {D});
  register_tensor("policy.wk", {D, D});
  register_tensor("policy.bk", {D});
  register_tensor("promo.w", {D, 4});
  register_tensor("promo.b", {4});

  register_tensor("value.ln.g", {D});
  register_tensor("value.ln.b", {D});
  register_tensor("value.w1", {D, 128});
  register_tensor("value.b1", {128});
  register_tensor("value.w2", {128, 3});
  register_tensor("value.b2", {3});
}

}  // namespace sqf::model
