// Copyright 2026 The canoe-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Serial against OpenMP for each kernel. Run with --benchmark_filter to pick one.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "canoe/kernels.hpp"
#include "canoe/pauli.hpp"
#include "canoe/simstate.hpp"

using namespace canoe;

namespace {

PauliHamiltonian random_hamiltonian(int n, int n_terms, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> letter(0, 3);
  std::normal_distribution<double> coeff;
  std::string text;
  for (int t = 0; t < n_terms; ++t) {
    std::string word;
    for (int k = 0; k < n; ++k) word += "IXYZ"[letter(rng)];
    text += std::to_string(coeff(rng)) + " 0.0 " + word + "\n";
  }
  return parse_hamiltonian(text);
}

SparseState random_table(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<SparseState::Entry> entries;
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b) entries.push_back({b, {g(rng), g(rng)}});
  return SparseState::from_entries(n, std::move(entries));
}

template <bool Parallel>
void BM_gather_rows(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto h = random_hamiltonian(n, 400, 1);
  const auto table = random_table(n, 2);
  std::vector<std::uint64_t> rows(std::uint64_t{1} << n);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  std::vector<Complex> out(rows.size());
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::omp::gather_rows(h, rows, table, out);
    else
      kernels::serial::gather_rows(h, rows, table, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows.size()));
}

template <bool Parallel>
void BM_project_columns(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto h = random_hamiltonian(n, 200, 3);
  const auto space = RestrictedSpace::particle_sector(n, n / 2);
  for (auto _ : state) {
    auto t = Parallel ? kernels::omp::project_columns(h, space) : kernels::serial::project_columns(h, space);
    benchmark::DoNotOptimize(t.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(space.size()));
}

template <bool Parallel>
void BM_shadow_accumulate(benchmark::State& state) {
  const int n = 8;
  const auto n_obs = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> basis(0, 2);
  std::uniform_int_distribution<std::uint64_t> bits(0, 255);
  std::vector<kernels::ShadowObservation> obs(n_obs);
  for (auto& o : obs) {
    o.bases.resize(n);
    for (auto& b : o.bases) b = static_cast<std::uint8_t>(basis(rng));
    o.outcome = bits(rng);
    o.count = 1;
  }
  std::vector<std::uint64_t> dets(256);
  for (std::size_t i = 0; i < dets.size(); ++i) dets[i] = i;
  std::vector<Complex> out(dets.size());
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::omp::shadow_accumulate(dets, 0, n, obs, out);
    else
      kernels::serial::shadow_accumulate(dets, 0, n, obs, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n_obs * dets.size()));
}

}  // namespace

BENCHMARK(BM_gather_rows<false>)->Arg(10)->Arg(14);
BENCHMARK(BM_gather_rows<true>)->Arg(10)->Arg(14);
BENCHMARK(BM_project_columns<false>)->Arg(12)->Arg(16);
BENCHMARK(BM_project_columns<true>)->Arg(12)->Arg(16);
BENCHMARK(BM_shadow_accumulate<false>)->Arg(1000)->Arg(10000);
BENCHMARK(BM_shadow_accumulate<true>)->Arg(1000)->Arg(10000);

BENCHMARK_MAIN();
