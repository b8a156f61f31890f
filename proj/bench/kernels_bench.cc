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

// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "vfm/field.h"
#include "vfm/kernels.h"
#include "vfm/rng.h"
#include "vfm/secure.h"

namespace vfm::kernels {
namespace {

Eigen::MatrixXd RandomMatrix(Eigen::Index rows, Eigen::Index cols) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(gen);
  return m;
}

void BM_GramSerial(benchmark::State& state) {
  const Eigen::MatrixXd x = RandomMatrix(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(GramSerial(x));
}

void BM_GramParallel(benchmark::State& state) {
  const Eigen::MatrixXd x = RandomMatrix(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(GramParallel(x));
}

void BM_CrossSerial(benchmark::State& state) {
  const Eigen::MatrixXd x = RandomMatrix(state.range(0), state.range(1));
  const Eigen::VectorXd v = RandomMatrix(state.range(0), 1).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(CrossSerial(x, v));
}

void BM_CrossParallel(benchmark::State& state) {
  const Eigen::MatrixXd x = RandomMatrix(state.range(0), state.range(1));
  const Eigen::VectorXd v = RandomMatrix(state.range(0), 1).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(CrossParallel(x, v));
}

struct BeaverInputs {
  std::vector<FieldElement> e, f;
  TripleColumns triples;
};

BeaverInputs MakeBeaverInputs(std::size_t n) {
  NoiseStream s(2);
  BeaverInputs in;
  for (std::size_t i = 0; i < n; ++i) {
    in.e.push_back(RandomFieldElement(s));
    in.f.push_back(RandomFieldElement(s));
  }
  Dealer dealer(3);
  in.triples = dealer.Issue(n).first.columns();
  return in;
}

void BM_BeaverDotSerial(benchmark::State& state) {
  const BeaverInputs in = MakeBeaverInputs(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        BeaverDotShareSerial(in.e, in.f, in.triples, true));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BeaverDotParallel(benchmark::State& state) {
  const BeaverInputs in = MakeBeaverInputs(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        BeaverDotShareParallel(in.e, in.f, in.triples, true));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_GramSerial)->Args({10000, 10})->Args({8000, 100});
BENCHMARK(BM_GramParallel)->Args({10000, 10})->Args({8000, 100});
BENCHMARK(BM_CrossSerial)->Args({50000, 10})->Args({8000, 100});
BENCHMARK(BM_CrossParallel)->Args({50000, 10})->Args({8000, 100});
BENCHMARK(BM_BeaverDotSerial)->Arg(1000)->Arg(100000);
BENCHMARK(BM_BeaverDotParallel)->Arg(1000)->Arg(100000);

}  // namespace
}  // namespace vfm::kernels

BENCHMARK_MAIN();
