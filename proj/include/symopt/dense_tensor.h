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

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "symopt/graph_ir.h"

namespace symopt {

enum class Precision { kFp64, kFp32 };

/// Row-major dense tensor of doubles.
struct DenseTensor {
  std::vector<std::int64_t> shape;
  std::vector<double> data;

  DenseTensor() = default;
  explicit DenseTensor(std::vector<std::int64_t> shape, double fill = 0.0);

  std::int64_t numel() const;
  int rank() const { return static_cast<int>(shape.size()); }
  std::vector<std::int64_t> strides() const;
};

DenseTensor random_normal(const std::vector<std::int64_t> &shape,
                          std::mt19937_64 &rng);

// Box [offsets, offsets + sizes) of `t`.
DenseTensor extract(const DenseTensor &t,
                    const std::vector<std::int64_t> &offsets,
                    const std::vector<std::int64_t> &sizes);
// Writes `src` into `dst` at `offsets`.
void insert(DenseTensor &dst, const DenseTensor &src,
            const std::vector<std::int64_t> &offsets);
// Elementwise sum in place; shapes must match.
void accumulate(DenseTensor &dst, const DenseTensor &src);

/// Evaluates one primitive. Throws ShapeError on incompatible shapes.
DenseTensor apply_op(OpKind kind, const std::vector<const DenseTensor *> &in,
                     int axis = -1, Rational scale = Rational(1),
                     Precision precision = Precision::kFp64);

double max_abs(const DenseTensor &t);
// max|a - b| / (1 + max|b|); infinity on shape mismatch or non-finite values.
double relative_error(const DenseTensor &a, const DenseTensor &b);

}  // namespace symopt
