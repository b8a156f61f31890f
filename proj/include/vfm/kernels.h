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

#ifndef VFM_KERNELS_H_
#define VFM_KERNELS_H_

// Data-parallel inner loops. Every kernel has a serial reference used by the
// tests and benchmarks; the parallel variants must agree with it exactly.

#include <span>

#include <Eigen/Dense>

#include "vfm/field.h"

namespace vfm::kernels {

// sum_i u_i v_i accumulated in index order. All coefficient values are
// produced through this summation order.
double Dot(std::span<const double> u, std::span<const double> v);

inline std::span<const double> Column(const Eigen::MatrixXd& m,
                                      Eigen::Index c) {
  return {m.data() + c * m.rows(), static_cast<std::size_t>(m.rows())};
}
inline std::span<const double> Span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

// X^T X, record-at-a-time.
Eigen::MatrixXd GramSerial(const Eigen::MatrixXd& x);
// X^T X, one column pair per task.
Eigen::MatrixXd GramParallel(const Eigen::MatrixXd& x);

// X^T v.
Eigen::VectorXd CrossSerial(const Eigen::MatrixXd& x, const Eigen::VectorXd& v);
Eigen::VectorXd CrossParallel(const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& v);

// One holder's Beaver triples for a length-n vector product.
struct TripleColumns {
  std::vector<FieldElement> a, b, c;
  std::size_t size() const { return a.size(); }
};

// out_i = x_i - mask_i
void MaskedDifference(std::span<const FieldElement> x,
                      std::span<const FieldElement> mask,
                      std::span<FieldElement> out);

// This holder's share of sum_i x_i y_i given the opened e = x - a and
// f = y - b: sum_i (c_i + e_i b_i + f_i a_i), plus sum_i e_i f_i for exactly
// one holder (`add_public_term`).
FieldElement BeaverDotShareSerial(std::span<const FieldElement> e,
                                  std::span<const FieldElement> f,
                                  const TripleColumns& triples,
                                  bool add_public_term);
FieldElement BeaverDotShareParallel(std::span<const FieldElement> e,
                                    std::span<const FieldElement> f,
                                    const TripleColumns& triples,
                                    bool add_public_term);

}  // namespace vfm::kernels

#endif  // VFM_KERNELS_H_
