#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sqf/common/error.hpp"

namespace sqf::nn {

using Shape = std::vector<int>;

inline int64_t numel(const Shape& s) {
  int64_t n = 1;
  for (int e : s) n *= e;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (size_t i = 0; i < s.size(); ++i)
    out += (i ? ", " : "") + std::to_string(s[i]);
  return out + ")";
}

inline void require_shape(bool ok, const Shape& a, const Shape& b,
                          const char* op) {
  if (!ok)
    throw ShapeError(std::string(op) + ": incompatible shapes " +
                     shape_str(a) + " and " + shape_str(b));
}

template <typename T>
class Tape;

// Lightweight handle to a node on a tape.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  int id = -1;

  const Shape& shape() const;
  const std::vector<T>& value() const;
  const std::vector<T>& grad() const;
};

// Reverse-mode tape. Nodes are appended in creation order, which is already
// a topological order; backward() walks it once in reverse. A tape is
// single-threaded; shared parameter data may feed many tapes in parallel.
template <typename T>
class Tape {
 public:
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MapM = Eigen::Map<Mat>;
  using CMapM = Eigen::Map<const Mat>;

  struct Node {
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad;
    bool requires_grad = false;
    std::function<void(Tape&)> backward;
  };

  Var<T> leaf(Shape shape, std::vector<T> data, bool requires_grad) {
    if (static_cast<int64_t>(data.size()) != numel(shape))
      throw ShapeError("leaf: data length " + std::to_string(data.size()) +
                       " does not match shape " + shape_str(shape));
    return push(std::move(shape), std::move(data), requires_grad, {});
  }
  Var<T> constant(Shape shape, std::vector<T> data) {
    return leaf(std::move(shape), std::move(data), false);
  }
  Var<T> scalar(T v) { return constant({1}, {v}); }
  Var<T> zeros(Shape shape) {
    std::vector<T> data(numel(shape), T(0));
    return constant(std::move(shape), std::move(data));
  }

  // Value copy that blocks gradient flow.
  Var<T> detach(Var<T> x) {
    return push(node(x).shape, node(x).value, false, {});
  }

  Var<T> add(Var<T> a, Var<T> b) {
    require_shape(node(a).shape == node(b).shape, node(a).shape, node(b).shape,
                  "add");
    std::vector<T> out = node(a).value;
    const auto& bv = node(b).value;
    for (size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    return push(node(a).shape, std::move(out), needs(a) || needs(b),
                [a, b](Tape& t) {
                  t.accumulate(a, t.node_out().grad);
                  t.accumulate(b, t.node_out().grad);
                });
  }

  Var<T> sub(Var<T> a, Var<T> b) { return add(a, scale(b, T(-1))); }

  Var<T> mul(Var<T> a, Var<T> b) {
    require_shape(node(a).shape == node(b).shape, node(a).shape, node(b).shape,
                  "mul");
    std::vector<T> out = node(a).value;
    const auto& bv = node(b).value;
    for (size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
    return push(node(a).shape, std::move(out), needs(a) || needs(b),
                [a, b](Tape& t) {
                  const auto& g = t.node_out().grad;
                  if (t.needs(a)) {
                    std::vector<T> da(g.size());
                    for (size_t i = 0; i < g.size(); ++i)
                      da[i] = g[i] * t.node(b).value[i];
                    t.accumulate(a, da);
                  }
                  if (t.needs(b)) {
                    std::vector<T> db(g.size());
                    for (size_t i = 0; i < g.size(); ++i)
                      db[i] = g[i] * t.node(a).value[i];
                    t.accumulate(b, db);
                  }
                });
  }

  Var<T> scale(Var<T> x, T c) {
    std::vector<T> out = node(x).value;
    for (T& v : out) v *= c;
    return push(node(x).shape, std::move(out), needs(x), [x, c](Tape& t) {
      std::vector<T> dx = t.node_out().grad;
      for (T& v : dx) v *= c;
      t.accumulate(x, dx);
    });
  }

  // Adds a length-n bias row to every row of an (m, n) matrix.
  Var<T> add_bias(Var<T> x, Var<T> bias) {
    const Shape& xs = node(x).shape;
    const Shape& bs = node(bias).shape;
    require_shape(xs.size() == 2 && bs.size() == 1 && bs[0] == xs[1], xs, bs,
                  "add_bias");
    const int m = xs[0], n = xs[1];
    std::vector<T> out = node(x).value;
    const auto& bv = node(bias).value;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) out[i * n + j] += bv[j];
    return push(xs, std::move(out), needs(x) || needs(bias),
                [x, bias, m, n](Tape& t) {
                  const auto& g = t.node_out().grad;
                  t.accumulate(x, g);
                  if (t.needs(bias)) {
                    std::vector<T> db(n, T(0));
                    for (int i = 0; i < m; ++i)
                      for (int j = 0; j < n; ++j) db[j] += g[i * n + j];
                    t.accumulate(bias, db);
                  }
                });
  }

  Var<T> matmul(Var<T> a, Var<T> b) {
    const Shape& as = node(a).shape;
    const Shape& bs = node(b).shape;
    require_shape(as.size() == 2 && bs.size() == 2 && as[1] == bs[0], as, bs,
                  "matmul");
    const int m = as[0], k = as[1], n = bs[1];
    std::vector<T> out(static_cast<size_t>(m) * n);
    MapM(out.data(), m, n).noalias() = CMapM(node(a).value.data(), m, k) *
                                       CMapM(node(b).value.data(), k, n);
    return push({m, n}, std::move(out), needs(a) || needs(b),
                [a, b, m, k, n](Tape& t) {
                  CMapM g(t.node_out().grad.data(), m, n);
                  if (t.needs(a)) {
                    std::vector<T> da(static_cast<size_t>(m) * k);
                    MapM(da.data(), m, k).noalias() =
                        g * CMapM(t.node(b).value.data(), k, n).transpose();
                    t.accumulate(a, da);
                  }
                  if (t.needs(b)) {
                    std::vector<T> db(static_cast<size_t>(k) * n);
                    MapM(db.data(), k, n).noalias() =
                        CMapM(t.node(a).value.data(), m, k).transpose() * g;
                    t.accumulate(b, db);
                  }
                });
  }

  // (B, m, k) x (B, k, n) -> (B, m, n)
  Var<T> batched_matmul(Var<T> a, Var<T> b) {
    const Shape& as = node(a).shape;
    const Shape& bs = node(b).shape;
    require_shape(as.size() == 3 && bs.size() == 3 && as[0] == bs[0] &&
                      as[2] == bs[1],
                  as, bs, "batched_matmul");
    const int B = as[0], m = as[1], k = as[2], n = bs[2];
    std::vector<T> out(static_cast<size_t>(B) * m * n);
    for (int i = 0; i < B; ++i)
      MapM(out.data() + static_cast<size_t>(i) * m * n, m, n).noalias() =
          CMapM(node(a).value.data() + static_cast<size_t>(i) * m * k, m, k) *
          CMapM(node(b).value.data() + static_cast<size_t>(i) * k * n, k, n);
    return push({B, m, n}, std::move(out), needs(a) || needs(b),
                [a, b, B, m, k, n](Tape& t) {
                  for (int i = 0; i < B; ++i) {
                    CMapM g(t.node_out().grad.data() +
                                static_cast<size_t>(i) * m * n,
                            m, n);
                    if (t.needs(a)) {
                      Mat da = g * CMapM(t.node(b).value.data() +
                                             static_cast<size_t>(i) * k * n,
                                         k, n)
                                       .transpose();
                      t.accumulate_slice(a, static_cast<size_t>(i) * m * k,
                                         da.data(),
                                         static_cast<size_t>(m) * k);
                    }
                    if (t.needs(b)) {
                      Mat db = CMapM(t.node(a).value.data() +
                                         static_cast<size_t>(i) * m * k,
                                     m, k)
                                   .transpose() *
                               g;
                      t.accumulate_slice(b, static_cast<size_t>(i) * k * n,
                                         db.data(),
                                         static_cast<size_t>(k) * n);
                    }
                  }
                });
  }

  Var<T> transpose(Var<T> x) {
    const Shape& xs = node(x).shape;
    require_shape(xs.size() == 2, xs, xs, "transpose");
    const int m = xs[0], n = xs[1];
    std::vector<T> out(node(x).value.size());
    MapM(out.data(), n, m) = CMapM(node(x).value.data(), m, n).transpose();
    return push({n, m}, std::move(out), needs(x), [x, m, n](Tape& t) {
      std::vector<T> dx(t.node(x).value.size());
      MapM(dx.data(), m, n) = CMapM(t.node_out().grad.data(), n, m).transpose();
      t.accumulate(x, dx);
    });
  }

  // (B, m, n) -> (B, n, m)
  Var<T> transpose_batched(Var<T> x) {
    const Shape& xs = node(x).shape;
    require_shape(xs.size() == 3, xs, xs, "transpose_batched");
    const int B = xs[0], m = xs[1], n = xs[2];
    std::vector<T> out(node(x).value.size());
    for (int i = 0; i < B; ++i)
      MapM(out.data() + static_cast<size_t>(i) * m * n, n, m) =
          CMapM(node(x).value.data() + static_cast<size_t>(i) * m * n, m, n)
              .transpose();
    return push({B, n, m}, std::move(out), needs(x), [x, B, m, n](Tape& t) {
      std::vector<T> dx(t.node(x).value.size());
      for (int i = 0; i < B; ++i)
        MapM(dx.data() + static_cast<size_t>(i) * m * n, m, n) =
            CMapM(t.node_out().grad.data() + static_cast<size_t>(i) * m * n, n,
                  m)
                .transpose();
      t.accumulate(x, dx);
    });
  }

  Var<T> reshape(Var<T> x, Shape shape) {
    require_shape(numel(shape) == numel(node(x).shape), node(x).shape, shape,
                  "reshape");
    return push(std::move(shape), node(x).value, needs(x),
                [x](Tape& t) { t.accumulate(x, t.node_out().grad); });
  }

  // (batch*t, heads*d) -> (batch*heads*t, d); rows regrouped so each
  // (batch, head) pair is a contiguous block of t rows, ready for
  // batched_matmul over batch*heads.
  Var<T> split_heads(Var<T> x, int batch, int heads) {
    const Shape& xs = node(x).shape;
    require_shape(xs.size() == 2 && batch > 0 && heads > 0 &&
                      xs[0] % batch == 0 && xs[1] % heads == 0,
                  xs, {batch, heads}, "split_heads");
    const int t = xs[0] / batch, d = xs[1] / heads;
    std::vector<T> out(node(x).value.size());
    permute_heads(node(x).value.data(), out.data(), batch, heads, t, d, false);
    return push({batch * heads * t, d}, std::move(out), needs(x),
                [x, batch, heads, t, d](Tape& tp) {
                  std::vector<T> dx(tp.node_out().grad.size());
                  permute_heads(tp.node_out().grad.data(), dx.data(), batch,
                                heads, t, d, true);
                  tp.accumulate(x, dx);
                });
  }

  // Inverse of split_heads: (batch*heads*t, d) -> (batch*t, heads*d).
  Var<T> merge_heads(Var<T> x, int batch, int heads) {
    const Shape& xs = node(x).shape;
    require_shape(xs.size() == 2 && batch > 0 && heads > 0 &&
                      xs[0] % (batch * heads) == 0,
                  xs, {batch, heads}, "merge_heads");
    const int t = xs[0] / (batch * heads), d = xs[1];
    std::vector<T> out(node(x).value.size());
    permute_heads(node(x).value.data(), out.data(), batch, heads, t, d, true);
    return push({batch * t, heads * d}, std::move(out), needs(x),
                [x, batch, heads, t, d](Tape& tp) {
                  std::vector<T> dx(tp.node_out().grad.size());
                  permute_heads(tp.node_out().grad.data(), dx.data(), batch,
                                heads, t, d, false);
                  tp.accumulate(x, dx);
                });
  }

  // (m, n) -> (m*times, n), each row repeated `times` consecutive times.
  Var<T> repeat_rows(Var<T> x, int times) {
    const Shape& xs = node(x).shape;
    require_shape(xs.size() == 2 && times > 0, xs, {times}, "repeat_rows");
    const int m = xs[0], n = xs[1];
    std::vector<T> out(static_cast<size_t>(m) * times * n);
    for (int i = 0; i < m; ++i)
      for (int r = 0; r < times; ++r)
        std::copy(node(x).value.begin() + static_cast<size_t>(i) * n,
                  node(x).value.begin() + static_cast<size_t>(i + 1) * n,
                  out.begin() + (static_cast<size_t>(i) * times + r) * n);
    return push({m * times, n}, std::move(out), needs(x),
                [x, m, n, times](Tape& t) {
                  const auto& g = t.node_out().grad;
                  std::vector<T> dx(static_cast<size_t>(m) * n, T(0));
                  for (int i = 0; i < m; ++i)
                    for (int r = 0; r < times; ++r)
                      for (int j = 0; j < n; ++j)
                        dx[i * n + j] +=
                            g[(static_cast<size_t>(i) * times + r) * n + j];
                  t.accumulate(x, dx);
                });
  }

  // (m, n) -> (times*m, n), the whole block repeated `times` times.
  Var<T> tile_rows(Var<T> x, int times) {
    const Shape& xs = node(x).shape;
    require_shape(xs.size() == 2 && times > 0, xs, {times}, "tile_rows");
    const int m = xs[0], n = xs[1];
    const size_t block = static_cast<size_t>(m) * n;
    std::vector<T> out(block * times);
    for (int r = 0; r < times; ++r)
      std::copy(node(x).value.begin(), node(x).value.end(),
                out.begin() + r * block);
    return push({times * m, n}, std::move(out), needs(x),
                [x, block, times](Tape& t) {
                  const auto& g = t.node_out().grad;
                  std::vector<T> dx(block, T(0));
                  for (int r = 0; r < times; ++r)
                    for (size_t i = 0; i < block; ++i)
                      dx[i] += g[r * block + i];
                  t.accumulate(x, dx);
                });
  }

  Var<T> concat(const std::vector<Var<T>>& xs, int axis) {
    if (xs.empty()) throw ShapeError("concat: no inputs");
    const Shape& s0 = node(xs[0]).shape;
    if (axis < 0 || axis >= static_cast<int>(s0.size()))
      throw ShapeError("concat: bad axis " + std::to_string(axis) + " for " +
                       shape_str(s0));
    Shape out_shape = s0;
    out_shape[axis] = 0;
    bool any_grad = false;
    for (Var<T> x : xs) {
      Shape s = node(x).shape;
      Shape t = s;
      t[axis] = s0[axis];
      require_shape(t == s0, s, s0, "concat");
      out_shape[axis] += s[axis];
      any_grad = any_grad || needs(x);
    }
    // Treat each input as (outer, inner) around the axis; outer counts match.
    int64_t outer = 1;
    for (int i = 0; i < axis; ++i) outer *= s0[i];
    std::vector<int64_t> inner(xs.size());
    int64_t inner_total = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      const Shape& s = node(xs[i]).shape;
      int64_t in = 1;
      for (size_t d = axis; d < s.size(); ++d) in *= s[d];
      inner[i] = in;
      inner_total += in;
    }
    std::vector<T> out(numel(out_shape));
    for (int64_t o = 0; o < outer; ++o) {
      int64_t at = 0;
      for (size_t i = 0; i < xs.size(); ++i) {
        const auto& v = node(xs[i]).value;
        std::copy(v.begin() + o * inner[i], v.begin() + (o + 1) * inner[i],
                  out.begin() + o * inner_total + at);
        at += inner[i];
      }
    }
    std::vector<Var<T>> ins = xs;
    return push(std::move(out_shape), std::move(out), any_grad,
                [ins, inner, outer, inner_total](Tape& t) {
                  const auto& g = t.node_out().grad;
                  for (int64_t o = 0; o < outer; ++o) {
                    int64_t at = 0;
                    for (size_t i = 0; i < ins.size(); ++i) {
                      if (t.needs(ins[i]))
                        t.accumulate_slice(
                            ins[i], o * inner[i],
                            g.data() + o * inner_total + at, inner[i]);
                      at += inner[i];
                    }
                  }
                });
  }

  // Contiguous row slice of a 2-D tensor.
  Var<T> slice_rows(Var<T> x, int begin, int count) {
    const Shape& xs = node(x).shape;
    require_shape(xs.size() == 2 && begin >= 0 && begin + count <= xs[0], xs,
                  {begin, count}, "slice_rows");
    const int n = xs[1];
    std::vector<T> out(node(x).value.begin() + static_cast<size_t>(begin) * n,
                       node(x).value.begin() +
                           static_cast<size_t>(begin + count) * n);
    return push({count, n}, std::move(out), needs(x), [x, begin, n](Tape& t) {
      const auto& g = t.node_out().grad;
      t.accumulate_slice(x, static_cast<size_t>(begin) * n, g.data(),
                         g.size());
    });
  }

  // Flat-index gather; backward scatter-adds. Output shape (k).
  Var<T> gather(Var<T> x, std::vector<int64_t> indices) {
    const int64_t total = numel(node(x).shape);
    for (int64_t idx : indices)
      if (idx < 0 || idx >= total)
        throw ShapeError("gather: index " + std::to_string(idx) +
                         " out of range for " + shape_str(node(x).shape));
    std::vector<T> out(indices.size());
    for (size_t i = 0; i < indices.size(); ++i)
      out[i] = node(x).value[indices[i]];
    const int k = static_cast<int>(indices.size());
    return push({k}, std::move(out), needs(x),
                [x, indices = std::move(indices)](Tape& t) {
                  const auto& g = t.node_out().grad;
                  auto& dx = t.node(x).grad;
                  for (size_t i = 0; i < indices.size(); ++i)
                    dx[indices[i]] += g[i];
                });
  }

  Var<T> sum_all(Var<T> x) {
    T s = 0;
    for (T v : node(x).value) s += v;
    return push({1}, {s}, needs(x), [x](Tape& t) {
      const T g = t.node_out().grad[0];
      std::vector<T> dx(t.node(x).value.size(), g);
      t.accumulate(x, dx);
    });
  }

  Var<T> mean_all(Var<T> x) {
    return scale(sum_all(x), T(1) / T(numel(node(x).shape)));
  }

  // Mean over one axis of a 2-D tensor: axis 0 -> (n), axis 1 -> (m).
  Var<T> mean(Var<T> x, int axis) {
    const Shape& xs = node(x).shape;
    require_shape(xs.size() == 2 && (axis == 0 || axis == 1), xs, {axis},
                  "mean");
    const int m = xs[0], n = xs[1];
    if (axis == 0) {
      std::vector<T> out(n, T(0));
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out[j] += node(x).value[i * n + j];
      for (T& v : out) v /= T(m);
      return push({n}, std::move(out), needs(x), [x, m, n](Tape& t) {
        const auto& g = t.node_out().grad;
        std::vector<T> dx(static_cast<size_t>(m) * n);
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) dx[i * n + j] = g[j] / T(m);
        t.accumulate(x, dx);
      });
    }
    std::vector<T> out(m, T(0));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) out[i] += node(x).value[i * n + j];
    for (T& v : out) v /= T(n);
    return push({m}, std::move(out), needs(x), [x, m, n](Tape& t) {
      const auto& g = t.node_out().grad;
      std::vector<T> dx(static_cast<size_t>(m) * n);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) dx[i * n + j] = g[i] / T(n);
      t.accumulate(x, dx);
    });
  }

  // Mean over groups of `group` consecutive rows: (m, n) -> (m/group, n).
  Var<T> mean_rows_grouped(Var<T> x, int group) {
    const Shape& xs = node(x).shape;
    require_shape(xs.size() == 2 && group > 0 && xs[0] % group == 0, xs,
                  {group}, "mean_rows_grouped");
    const int m = xs[0], n = xs[1], out_m = m / group;
    std::vector<T> out(static_cast<size_t>(out_m) * n, T(0));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        out[(i / group) * n + j] += node(x).value[i * n + j];
    for (T& v : out) v /= T(group);
    return push({out_m, n}, std::move(out), needs(x), [x, m, n, group](Tape& t) {
      const auto& g = t.node_out().grad;
      std::vector<T> dx(static_cast<size_t>(m) * n);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
          dx[i * n + j] = g[(i / group) * n + j] / T(group);
      t.accumulate(x, dx);
    });
  }

  // Row-wise softmax over the last axis of a 2-D tensor.
  Var<T> softmax_rows(Var<T> x) {
    const Shape& xs = node(x).shape;
    require_shape(xs.size() == 2, xs, xs, "softmax_rows");
    const int m = xs[0], n = xs[1];
    std::vector<T> out(node(x).value.size());
    for (int i = 0; i < m; ++i) {
      const T* row = node(x).value.data() + static_cast<size_t>(i) * n;
      T mx = row[0];
      for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
      T sum = 0;
      for (int j = 0; j < n; ++j) {
        out[i * n + j] = std::exp(row[j] - mx);
        sum += out[i * n + j];
      }
      for (int j = 0; j < n; ++j) out[i * n + j] /= sum;
    }
    return push(xs, std::move(out), needs(x), [x, m, n](Tape& t) {
      const auto& y = t.node_out().value;
      const auto& g = t.node_out().grad;
      std::vector<T> dx(y.size());
      for (int i = 0; i < m; ++i) {
        T dot = 0;
        for (int j = 0; j < n; ++j) dot += g[i * n + j] * y[i * n + j];
        for (int j = 0; j < n; ++j)
          dx[i * n + j] = y[i * n + j] * (g[i * n + j] - dot);
      }
      t.accumulate(x, dx);
    });
  }

  // Row-wise layer norm with learned gain/bias over the last axis.
  Var<T> layer_norm_rows(Var<T> x, Var<T> gain, Var<T> bias,
                         T eps = T(1e-5)) {
    const Shape& xs = node(x).shape;
    const Shape& gs = node(gain).shape;
    require_shape(xs.size() == 2 && gs.size() == 1 && gs[0] == xs[1], xs, gs,
                  "layer_norm_rows");
    require_shape(node(bias).shape == gs, node(bias).shape, gs,
                  "layer_norm_rows");
    const int m = xs[0], n = xs[1];
    std::vector<T> out(node(x).value.size());
    std::vector<T> inv_std(m), xhat(node(x).value.size());
    for (int i = 0; i < m; ++i) {
      const T* row = node(x).value.data() + static_cast<size_t>(i) * n;
      T mu = 0;
      for (int j = 0; j < n; ++j) mu += row[j];
      mu /= T(n);
      T var = 0;
      for (int j = 0; j < n; ++j) var += (row[j] - mu) * (row[j] - mu);
      var /= T(n);
      const T is = T(1) / std::sqrt(var + eps);
      inv_std[i] = is;
      for (int j = 0; j < n; ++j) {
        xhat[i * n + j] = (row[j] - mu) * is;
        out[i * n + j] =
            xhat[i * n + j] * node(gain).value[j] + node(bias).value[j];
      }
    }
    return push(
        xs, std::move(out), needs(x) || needs(gain) || needs(bias),
        [x, gain, bias, m, n, inv_std = std::move(inv_std),
         xhat = std::move(xhat)](Tape& t) {
          const auto& g = t.node_out().grad;
          if (t.needs(gain) || t.needs(bias)) {
            std::vector<T> dgain(n, T(0)), dbias(n, T(0));
            for (int i = 0; i < m; ++i)
              for (int j = 0; j < n; ++j) {
                dgain[j] += g[i * n + j] * xhat[i * n + j];
                dbias[j] += g[i * n + j];
              }
            if (t.needs(gain)) t.accumulate(gain, dgain);
            if (t.needs(bias)) t.accumulate(bias, dbias);
          }
          if (t.needs(x)) {
            std::vector<T> dx(static_cast<size_t>(m) * n);
            for (int i = 0; i < m; ++i) {
              T mean_dy = 0, mean_dyx = 0;
              for (int j = 0; j < n; ++j) {
                const T dy = g[i * n + j] * t.node(gain).value[j];
                mean_dy += dy;
                mean_dyx += dy * xhat[i * n + j];
              }
              mean_dy /= T(n);
              mean_dyx /= T(n);
              for (int j = 0; j < n; ++j) {
                const T dy = g[i * n + j] * t.node(gain).value[j];
                dx[i * n + j] =
                    (dy - mean_dy - xhat[i * n + j] * mean_dyx) * inv_std[i];
              }
            }
            t.accumulate(x, dx);
          }
        });
  }

  // GELU, tanh approximation (same formula the finite-difference checks use).
  Var<T> gelu(Var<T> x) {
    constexpr T k = T(0.7978845608028654);  // sqrt(2/pi)
    constexpr T c = T(0.044715);
    std::vector<T> out(node(x).value.size());
    for (size_t i = 0; i < out.size(); ++i) {
      const T v = node(x).value[i];
      out[i] = T(0.5) * v * (T(1) + std::tanh(k * (v + c * v * v * v)));
    }
    return push(node(x).shape, std::move(out), needs(x), [x](Tape& t) {
      const auto& g = t.node_out().grad;
      std::vector<T> dx(g.size());
      for (size_t i = 0; i < g.size(); ++i) {
        const T v = t.node(x).value[i];
        const T u = k * (v + c * v * v * v);
        const T th = std::tanh(u);
        const T d = T(0.5) * (T(1) + th) +
                    T(0.5) * v * (T(1) - th * th) * k * (T(1) + T(3) * c * v * v);
        dx[i] = g[i] * d;
      }
      t.accumulate(x, dx);
    });
  }

  Var<T> relu(Var<T> x) {
    std::vector<T> out(node(x).value.size());
    for (size_t i = 0; i < out.size(); ++i)
      out[i] = node(x).value[i] > T(0) ? node(x).value[i] : T(0);
    return push(node(x).shape, std::move(out), needs(x), [x](Tape& t) {
      const auto& g = t.node_out().grad;
      std::vector<T> dx(g.size());
      for (size_t i = 0; i < g.size(); ++i)
        dx[i] = t.node(x).value[i] > T(0) ? g[i] : T(0);
      t.accumulate(x, dx);
    });
  }

  Var<T> tanh_op(Var<T> x) {
    std::vector<T> out(node(x).value.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(node(x).value[i]);
    return push(node(x).shape, std::move(out), needs(x), [x](Tape& t) {
      const auto& y = t.node_out().value;
      const auto& g = t.node_out().grad;
      std::vector<T> dx(g.size());
      for (size_t i = 0; i < g.size(); ++i) dx[i] = g[i] * (T(1) - y[i] * y[i]);
      t.accumulate(x, dx);
    });
  }

  Var<T> sqrt_op(Var<T> x) {
    std::vector<T> out(node(x).value.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(node(x).value[i]);
    return push(node(x).shape, std::move(out), needs(x), [x](Tape& t) {
      const auto& y = t.node_out().value;
      const auto& g = t.node_out().grad;
      std::vector<T> dx(g.size());
      for (size_t i = 0; i < g.size(); ++i)
        dx[i] = g[i] / (T(2) * std::max(y[i], T(1e-12)));
      t.accumulate(x, dx);
    });
  }

  // Mean cross entropy of (m, n) logits against integer class targets.
  Var<T> cross_entropy(Var<T> logits, const std::vector<int>& targets) {
    const Shape& xs = node(logits).shape;
    require_shape(xs.size() == 2 &&
                      xs[0] == static_cast<int>(targets.size()),
                  xs, {static_cast<int>(targets.size())}, "cross_entropy");
    const int m = xs[0], n = xs[1];
    std::vector<T> probs = softmax_values(node(logits).value, m, n);
    T loss = 0;
    for (int i = 0; i < m; ++i)
      loss -= std::log(std::max(probs[i * n + targets[i]], T(1e-30)));
    loss /= T(m);
    return push({1}, {loss}, needs(logits),
                [logits, targets, probs = std::move(probs), m, n](Tape& t) {
                  const T g = t.node_out().grad[0] / T(m);
                  std::vector<T> dx(probs.size());
                  for (int i = 0; i < m; ++i)
                    for (int j = 0; j < n; ++j)
                      dx[i * n + j] =
                          g * (probs[i * n + j] - (j == targets[i] ? 1 : 0));
                  t.accumulate(logits, dx);
                });
  }

  // Mean cross entropy against per-row target distributions.
  Var<T> cross_entropy_soft(Var<T> logits, const std::vector<T>& target) {
    const Shape& xs = node(logits).shape;
    require_shape(xs.size() == 2 &&
                      numel(xs) == static_cast<int64_t>(target.size()),
                  xs, {static_cast<int>(target.size())}, "cross_entropy_soft");
    const int m = xs[0], n = xs[1];
    std::vector<T> probs = softmax_values(node(logits).value, m, n);
    T loss = 0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        if (target[i * n + j] > T(0))
          loss -= target[i * n + j] *
                  std::log(std::max(probs[i * n + j], T(1e-30)));
    loss /= T(m);
    return push({1}, {loss}, needs(logits),
                [logits, target, probs = std::move(probs), m, n](Tape& t) {
                  const T g = t.node_out().grad[0] / T(m);
                  std::vector<T> dx(probs.size());
                  for (int i = 0; i < m; ++i)
                    for (int j = 0; j < n; ++j)
                      dx[i * n + j] = g * (probs[i * n + j] - target[i * n + j]);
                  t.accumulate(logits, dx);
                });
  }

  Var<T> mse(Var<T> a, Var<T> b) {
    require_shape(node(a).shape == node(b).shape, node(a).shape, node(b).shape,
                  "mse");
    const auto& av = node(a).value;
    const auto& bv = node(b).value;
    T loss = 0;
    for (size_t i = 0; i < av.size(); ++i)
      loss += (av[i] - bv[i]) * (av[i] - bv[i]);
    loss /= T(av.size());
    return push({1}, {loss}, needs(a) || needs(b), [a, b](Tape& t) {
      const auto& av = t.node(a).value;
      const auto& bv = t.node(b).value;
      const T g = T(2) * t.node_out().grad[0] / T(av.size());
      if (t.needs(a)) {
        std::vector<T> da(av.size());
        for (size_t i = 0; i < av.size(); ++i) da[i] = g * (av[i] - bv[i]);
        t.accumulate(a, da);
      }
      if (t.needs(b)) {
        std::vector<T> db(av.size());
        for (size_t i = 0; i < av.size(); ++i) db[i] = g * (bv[i] - av[i]);
        t.accumulate(b, db);
      }
    });
  }

  // Populates gradients of every requires_grad node reachable from loss.
  // Gradients are zeroed first, so repeated calls are idempotent.
  void backward(Var<T> loss) {
    if (loss.tape != this) throw ShapeError("backward: loss from another tape");
    if (numel(node(loss).shape) != 1)
      throw ShapeError("backward: loss must be scalar, got " +
                       shape_str(node(loss).shape));
    for (Node& n : nodes_) n.grad.assign(n.value.size(), T(0));
    nodes_[loss.id].grad[0] = T(1);
    for (int id = loss.id; id >= 0; --id) {
      if (!nodes_[id].backward || !nodes_[id].requires_grad) continue;
      current_ = id;
      nodes_[id].backward(*this);
    }
    current_ = -1;
  }

  const Node& node(Var<T> v) const { return nodes_[v.id]; }
  Node& node(Var<T> v) { return nodes_[v.id]; }
  bool needs(Var<T> v) const { return nodes_[v.id].requires_grad; }
  size_t size() const { return nodes_.size(); }

  // Drops every node past `mark`; lets a long-lived tape reuse its prefix.
  void truncate(size_t mark) { nodes_.resize(mark); }

 private:
  // Node whose backward rule is currently running.
  Node& node_out() { return nodes_[current_]; }

  void accumulate(Var<T> v, const std::vector<T>& g) {
    if (!needs(v)) return;
    auto& dst = nodes_[v.id].grad;
    for (size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  }
  void accumulate_slice(Var<T> v, size_t offset, const T* g, size_t len) {
    if (!needs(v)) return;
    auto& dst = nodes_[v.id].grad;
    for (size_t i = 0; i < len; ++i) dst[offset + i] += g[i];
  }

  // Copies between (batch, t, heads, d) and (batch, heads, t, d) row orders;
  // `invert` selects the direction.
  static void permute_heads(const T* src, T* dst, int batch, int heads, int t,
                            int d, bool invert) {
    for (int b = 0; b < batch; ++b)
      for (int hh = 0; hh < heads; ++hh)
        for (int tok = 0; tok < t; ++tok) {
          const size_t joined =
              ((static_cast<size_t>(b) * t + tok) * heads + hh) * d;
          const size_t split =
              ((static_cast<size_t>(b) * heads + hh) * t + tok) * d;
          const size_t from = invert ? split : joined;
          const size_t to = invert ? joined : split;
          std::copy(src + from, src + from + d, dst + to);
        }
  }

  static std::vector<T> softmax_values(const std::vector<T>& x, int m, int n) {
    std::vector<T> out(x.size());
    for (int i = 0; i < m; ++i) {
      T mx = x[i * n];
      for (int j = 1; j < n; ++j) mx = std::max(mx, x[i * n + j]);
      T sum = 0;
      for (int j = 0; j < n; ++j) {
        out[i * n + j] = std::exp(x[i * n + j] - mx);
        sum += out[i * n + j];
      }
      for (int j = 0; j < n; ++j) out[i * n + j] /= sum;
    }
    return out;
  }

  Var<T> push(Shape shape, std::vector<T> value, bool requires_grad,
              std::function<void(Tape&)> backward) {
    nodes_.push_back(Node{std::move(shape), std::move(value), {}, requires_grad,
                          std::move(backward)});
    return Var<T>{this, static_cast<int>(nodes_.size() - 1)};
  }

  std::vector<Node> nodes_;
  int current_ = -1;
};

template <typename T>
const Shape& Var<T>::shape() const {
  return tape->node(*this).shape;
}
template <typename T>
const std::vector<T>& Var<T>::value() const {
  return tape->node(*this).value;
}
template <typename T>
const std::vector<T>& Var<T>::grad() const {
  return tape->node(*this).grad;
}

}  // namespace sqf::nn
