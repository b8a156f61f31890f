// Copyright 2026 The vfm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vfm/kernels.h"

#include <omp.h>

#include <vector>

namespace vfm::kernels {

double Dot(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

Eigen::MatrixXd GramSerial(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows(), d = x.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index a = 0; a < d; ++a) {
      const double xa = x(i, a);
      for (Eigen::Index b = 0; b < d; ++b) out(a, b) += xa * x(i, b);
    }
  }
  return out;
}

Eigen::MatrixXd GramParallel(const Eigen::MatrixXd& x) {
  const Eigen::Index d = x.cols();
  Eigen::MatrixXd out(d, d);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  pairs.reserve(static_cast<std::size_t>(d * (d + 1) / 2));
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a; b < d; ++b) pairs.emplace_back(a, b);
  }
  const auto count = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t p = 0; p < count; ++p) {
    const auto [a, b] = pairs[static_cast<std::size_t>(p)];
    const double s = Dot(Column(x, a), Column(x, b));
    out(a, b) = s;
    out(b, a) = s;
  }
  return out;
}

Eigen::VectorXd CrossSerial(const Eigen::MatrixXd& x,
                            const Eigen::VectorXd& v) {
  const Eigen::Index n = x.rows(), d = x.cols();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index a = 0; a < d; ++a) out[a] += v[i] * x(i, a);
  }
  return out;
}

Eigen::VectorXd CrossParallel(const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& v) {
  const Eigen::Index d = x.cols();
  Eigen::VectorXd out(d);
#pragma omp parallel for schedule(static)
  for (Eigen::Index a = 0; a < d; ++a) out[a] = Dot(Span(v), Column(x, a));
  return out;
}

void MaskedDifference(std::span<const FieldElement> x,
                      std::span<const FieldElement> mask,
                      std::span<FieldElement> out) {
  const auto n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static) if (n > 4096)
  for (std::int64_t i = 0; i < n; ++i) out[i] = x[i] - mask[i];
}

FieldElement BeaverDotShareSerial(std::span<const FieldElement> e,
                                  std::span<const FieldElement> f,
                                  const TripleColumns& triples,
                                  bool add_public_term) {
  FieldElement acc;
  for (std::size_t i = 0; i < e.size(); ++i) {
    acc += triples.c[i] + e[i] * triples.b[i] + f[i] * triples.a[i];
    if (add_public_term) acc += e[i] * f[i];
  }
  return acc;
}

FieldElement BeaverDotShareParallel(std::span<const FieldElement> e,
                                    std::span<const FieldElement> f,
                                    const TripleColumns& triples,
                                    bool add_public_term) {
  const auto n = static_cast<std::int64_t>(e.size());
  std::vector<FieldElement> partial(
      static_cast<std::size_t>(omp_get_max_threads()));
#pragma omp parallel
  {
    FieldElement acc;
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < n; ++i) {
      acc += triples.c[i] + e[i] * triples.b[i] + f[i] * triples.a[i];
      if (add_public_term) acc += e[i] * f[i];
    }
    partial[static_cast<std::size_t>(omp_get_thread_num())] = acc;
  }
  // Field addition is exact, so the combination order is irrelevant.
  FieldElement total;
  for (const FieldElement& p : partial) total += p;
  return total;
}

}  // namespace vfm::kernels
