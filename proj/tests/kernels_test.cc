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

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "vfm/rng.h"
#include "vfm/secure.h"

namespace vfm::kernels {
namespace {

Eigen::MatrixXd RandomMatrix(int rows, int cols, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = u(gen);
  return m;
}

TEST(DotTest, IndexOrderSum) {
  const std::vector<double> u = {1e16, 1.0, -1e16}, v = {1.0, 1.0, 1.0};
  // Left-to-right accumulation loses the 1.
  EXPECT_EQ(Dot(u, v), 0.0);
  const std::vector<double> a = {0.5, -2.0}, b = {4.0, 0.25};
  EXPECT_EQ(Dot(a, b), 1.5);
}

TEST(GramTest, ParallelEqualsSerialExactly) {
  for (int d : {1, 3, 17}) {
    const Eigen::MatrixXd x = RandomMatrix(301, d, d);
    const Eigen::MatrixXd serial = GramSerial(x);
    EXPECT_EQ(GramParallel(x), serial);
    EXPECT_LE((serial - x.transpose() * x).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(GramTest, EntriesEqualColumnDots) {
  const Eigen::MatrixXd x = RandomMatrix(50, 4, 9);
  const Eigen::MatrixXd g = GramParallel(x);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) EXPECT_EQ(g(a, b), Dot(Column(x, a), Column(x, b)));
  }
}

TEST(CrossTest, ParallelEqualsSerialExactly) {
  const Eigen::MatrixXd x = RandomMatrix(400, 9, 2);
  const Eigen::VectorXd v = RandomMatrix(400, 1, 3).col(0);
  const Eigen::VectorXd serial = CrossSerial(x, v);
  EXPECT_EQ(CrossParallel(x, v), serial);
  EXPECT_LE((serial - x.transpose() * v).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(BeaverKernelTest, ParallelEqualsSerial) {
  NoiseStream s(4);
  const std::size_t n = 5000;
  std::vector<FieldElement> e(n), f(n);
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = RandomFieldElement(s);
    f[i] = RandomFieldElement(s);
  }
  Dealer dealer(5);
  auto [t0, t1] = dealer.Issue(n);
  for (bool pub : {true, false}) {
    EXPECT_EQ(BeaverDotShareParallel(e, f, t0.columns(), pub),
              BeaverDotShareSerial(e, f, t0.columns(), pub));
  }
}

TEST(MaskedDifferenceTest, Subtracts) {
  const std::vector<FieldElement> x = {FieldElement::FromSigned(5)};
  const std::vector<FieldElement> m = {FieldElement::FromSigned(7)};
  std::vector<FieldElement> out(1);
  MaskedDifference(x, m, out);
  EXPECT_EQ(out[0].Centered(), -2);
}

}  // namespace
}  // namespace vfm::kernels
