#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "sqf/common/rng.hpp"
#include "sqf/nn/autograd.hpp"

namespace sqf::nn {

template <typename T>
struct ParamSpec {
  Shape shape;
  std::vector<T> value;
};

// Compares analytic gradients of f against central finite differences on a
// sample of coordinates per parameter. Returns the max relative error
// |analytic - numeric| / (|analytic| + |numeric| + 1e-6). The denominator
// floor is the absolute scale below which differences are ignored: where the
// true gradient is ~1e-9 the per-side loss change sits at double roundoff and
// the numeric side is pure noise, yet a real backward bug at that coordinate
// still produces a difference far above 1e-10. f must be deterministic; call
// with T = double for meaningful tolerances.
template <typename T>
double grad_check(
    const std::function<Var<T>(Tape<T>&, const std::vector<Var<T>>&)>& f,
    const std::vector<ParamSpec<T>>& theta, Rng& rng,
    int samples_per_param = 6, double eps = 1e-3) {
  auto eval = [&](const std::vector<ParamSpec<T>>& params, bool want_grad,
                  std::vector<std::vector<T>>* grads) {
    Tape<T> tape;
    std::vector<Var<T>> vars;
    vars.reserve(params.size());
    for (const auto& p : params)
      vars.push_back(tape.leaf(p.shape, p.value, true));
    Var<T> loss = f(tape, vars);
    const T out = loss.value()[0];
    if (want_grad) {
      tape.backward(loss);
      grads->clear();
      for (Var<T> v : vars) grads->push_back(v.grad());
    }
    return out;
  };

  std::vector<std::vector<T>> analytic;
  eval(theta, true, &analytic);

  double max_err = 0.0;
  std::vector<ParamSpec<T>> work = theta;
  for (size_t p = 0; p < theta.size(); ++p) {
    const size_t n = theta[p].value.size();
    const size_t samples = std::min<size_t>(samples_per_param, n);
    for (size_t s = 0; s < samples; ++s) {
      const size_t i = n <= samples ? s : rng.below(n);
      const T keep = work[p].value[i];
      work[p].value[i] = keep + T(eps);
      const double up = eval(work, false, nullptr);
      work[p].value[i] = keep - T(eps);
      const double down = eval(work, false, nullptr);
      work[p].value[i] = keep;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[p][i];
      const double err = std::abs(a - numeric) /
                         (std::abs(a) + std::abs(numeric) + 1e-6);
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

}  // namespace sqf::nn
