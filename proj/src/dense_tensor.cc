/* Copyright 2026 The symopt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "symopt/dense_tensor.h"

#include <cmath>
#include <limits>

namespace symopt {

namespace {

std::int64_t product(const std::vector<std::int64_t> &v) {
  std::int64_t n = 1;
  for (std::int64_t x : v) n *= x;
  return n;
}

// Calls f(index) for every multi-index of `shape` in row-major order.
template <typename F>
void for_each_index(const std::vector<std::int64_t> &shape, F &&f) {
  std::vector<std::int64_t> idx(shape.size(), 0);
  std::int64_t n = product(shape);
  for (std::int64_t k = 0; k < n; ++k) {
    f(idx);
    for (int d = static_cast<int>(shape.size()) - 1; d >= 0; --d) {
      if (++idx[d] < shape[d]) break;
      idx[d] = 0;
    }
  }
}

double round_to(double v, Precision p) {
  return p == Precision::kFp32 ? static_cast<double>(static_cast<float>(v)) : v;
}

double unary(OpKind kind, double v, double scale) {
  switch (kind) {
    case OpKind::kExp: return std::exp(v);
    case OpKind::kSilu: return v / (1.0 + std::exp(-v));
    case OpKind::kSquare: return v * v;
    case OpKind::kSqrt: return std::sqrt(v);
    case OpKind::kScaleConst: return v * scale;
    default: throw ShapeError("not a unary elementwise op");
  }
}

double binary(OpKind kind, double a, double b) {
  switch (kind) {
    case OpKind::kAdd: return a + b;
    case OpKind::kMul: return a * b;
    case OpKind::kDiv: return a / b;
    default: throw ShapeError("not a binary elementwise op");
  }
}

}  // namespace

DenseTensor::DenseTensor(std::vector<std::int64_t> s, double fill)
    : shape(std::move(s)), data(product(shape), fill) {}

std::int64_t DenseTensor::numel() const { return product(shape); }

std::vector<std::int64_t> DenseTensor::strides() const {
  std::vector<std::int64_t> s(shape.size(), 1);
  for (int d = rank() - 2; d >= 0; --d) s[d] = s[d + 1] * shape[d + 1];
  return s;
}

DenseTensor random_normal(const std::vector<std::int64_t> &shape,
                          std::mt19937_64 &rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  DenseTensor t(shape);
  for (double &v : t.data) v = dist(rng);
  return t;
}

DenseTensor extract(const DenseTensor &t,
                    const std::vector<std::int64_t> &offsets,
                    const std::vector<std::int64_t> &sizes) {
  DenseTensor out(sizes);
  auto st = t.strides();
  std::int64_t k = 0;
  for_each_index(sizes, [&](const std::vector<std::int64_t> &idx) {
    std::int64_t src = 0;
    for (std::size_t d = 0; d < idx.size(); ++d) {
      src += (offsets[d] + idx[d]) * st[d];
    }
    out.data[k++] = t.data[src];
  });
  return out;
}

void insert(DenseTensor &dst, const DenseTensor &src,
            const std::vector<std::int64_t> &offsets) {
  auto st = dst.strides();
  std::int64_t k = 0;
  for_each_index(src.shape, [&](const std::vector<std::int64_t> &idx) {
    std::int64_t at = 0;
    for (std::size_t d = 0; d < idx.size(); ++d) {
      at += (offsets[d] + idx[d]) * st[d];
    }
    dst.data[at] = src.data[k++];
  });
}

void accumulate(DenseTensor &dst, const DenseTensor &src) {
  if (dst.shape != src.shape) throw ShapeError("accumulate: shape mismatch");
  for (std::size_t k = 0; k < dst.data.size(); ++k) dst.data[k] += src.data[k];
}

DenseTensor apply_op(OpKind kind, const std::vector<const DenseTensor *> &in,
                     int axis, Rational scale, Precision precision) {
  std::vector<std::vector<std::int64_t>> shapes;
  for (const DenseTensor *t : in) shapes.push_back(t->shape);
  DenseTensor out(result_shape(kind, axis, shapes));
  const double c = boost::rational_cast<double>(scale);

  if (kind == OpKind::kMatmul) {
    const DenseTensor &a = *in[0], &b = *in[1];
    int n = a.rank();
    std::int64_t rows = a.shape[n - 2], inner = a.shape[n - 1],
                 cols = b.shape[n - 1];
    std::int64_t batch = out.numel() / (rows * cols);
    for (std::int64_t bt = 0; bt < batch; ++bt) {
      const double *pa = a.data.data() + bt * rows * inner;
      const double *pb = b.data.data() + bt * inner * cols;
      double *po = out.data.data() + bt * rows * cols;
      // i-k-j order; each output still sums over k in increasing order.
      for (std::int64_t i = 0; i < rows; ++i) {
        double *row = po + i * cols;
        for (std::int64_t k = 0; k < inner; ++k) {
          const double aik = pa[i * inner + k];
          const double *pbk = pb + k * cols;
          for (std::int64_t j = 0; j < cols; ++j) row[j] += aik * pbk[j];
        }
        for (std::int64_t j = 0; j < cols; ++j) row[j] = round_to(row[j], precision);
      }
    }
    return out;
  }
  if (kind == OpKind::kSumData) {
    const DenseTensor &a = *in[0];
    auto st = a.strides();
    std::int64_t k = 0;
    for_each_index(out.shape, [&](const std::vector<std::int64_t> &idx) {
      std::int64_t base = 0;
      for (std::size_t d = 0; d < idx.size(); ++d) base += idx[d] * st[d];
      double acc = 0.0;
      for (std::int64_t j = 0; j < a.shape[axis]; ++j) {
        acc += a.data[base + j * st[axis]];
      }
      out.data[k++] = round_to(acc, precision);
    });
    return out;
  }
  if (is_unary_elementwise(kind) || kind == OpKind::kAccum) {
    for (std::size_t k = 0; k < out.data.size(); ++k) {
      double v = in[0]->data[k];
      out.data[k] = kind == OpKind::kAccum ? v : round_to(unary(kind, v, c), precision);
    }
    return out;
  }
  if (is_binary_elementwise(kind)) {
    const DenseTensor &a = *in[0], &b = *in[1];
    auto sa = a.strides(), sb = b.strides();
    std::int64_t k = 0;
    for_each_index(out.shape, [&](const std::vector<std::int64_t> &idx) {
      std::int64_t ia = 0, ib = 0;
      for (std::size_t d = 0; d < idx.size(); ++d) {
        if (a.shape[d] != 1) ia += idx[d] * sa[d];
        if (b.shape[d] != 1) ib += idx[d] * sb[d];
      }
      out.data[k++] = round_to(binary(kind, a.data[ia], b.data[ib]), precision);
    });
    return out;
  }
  throw ShapeError(std::string("apply_op: unsupported op ") + op_name(kind));
}

double max_abs(const DenseTensor &t) {
  double m = 0.0;
  for (double v : t.data) m = std::max(m, std::abs(v));
  return m;
}

double relative_error(const DenseTensor &a, const DenseTensor &b) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (a.shape != b.shape) return kInf;
  double diff = 0.0;
  for (std::size_t k = 0; k < a.data.size(); ++k) {
    double d = std::abs(a.data[k] - b.data[k]);
    if (!std::isfinite(d)) return kInf;
    diff = std::max(diff, d);
  }
  return diff / (1.0 + max_abs(b));
}

}  // namespace symopt
