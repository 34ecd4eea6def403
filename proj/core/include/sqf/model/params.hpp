#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sqf/common/rng.hpp"
#include "sqf/model/config.hpp"
#include "sqf/nn/autograd.hpp"

namespace sqf::model {

struct NamedTensor {
  std::string name;
  nn::Shape shape;
  std::vector<float> data;

  int64_t size() const { return static_cast<int64_t>(data.size()); }
};

// Every learnable tensor of one model, registered exactly once under a
// stable name. Registration order is fixed by the config, so two Parameters
// with equal configs are index-compatible.
class Parameters {
 public:
  // Fresh initialization: truncated normal (std 0.02) for projection
  // weights and rating embeddings, ones for layer norm gains, zeros for
  // biases and for the position encoding tables (absolute, relative and
  // the shared gab projection), so every encoding starts as plain
  // dot-product attention.
  Parameters(const ModelConfig& cfg, uint64_t seed);

  // All-zero tensors; used as an accumulator shape template.
  static Parameters zeros_like(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }

  int count() const { return static_cast<int>(tensors_.size()); }
  const NamedTensor& tensor(int i) const { return tensors_[i]; }
  NamedTensor& tensor(int i) { return tensors_[i]; }

  bool has(const std::string& name) const { return index_.count(name) != 0; }
  int index_of(const std::string& name) const;
  const NamedTensor& at(const std::string& name) const {
    return tensors_[index_of(name)];
  }
  NamedTensor& at(const std::string& name) {
    return tensors_[index_of(name)];
  }

  int64_t total_elements() const;

 private:
  explicit Parameters(const ModelConfig& cfg);
  void register_tensor(std::string name, nn::Shape shape);
  void build_registry();

  ModelConfig cfg_;
  std::vector<NamedTensor> tensors_;
  std::map<std::string, int> index_;
};

}  // namespace sqf::model
