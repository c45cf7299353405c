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

#include <omp.h>

#include <cstdint>

#include "canoe/kernels.hpp"

namespace canoe::kernels::omp {

void gather_rows(const PauliHamiltonian& h, std::span<const std::uint64_t> rows,
                 const SparseState& table, std::span<Complex> out) {
  const auto& terms = h.terms();
  const auto n = static_cast<std::int64_t>(rows.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const std::uint64_t s = rows[static_cast<std::size_t>(i)];
    Complex acc = 0.0;
    for (const auto& t : terms) {
      if (const Complex* a = table.find(s ^ t.x_mask())) {
        acc += t.coeff() * std::conj(t.phase(s)) * (*a);
      }
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
}

std::vector<Triplet> project_columns(const PauliHamiltonian& h, const RestrictedSpace& space) {
  const auto& dets = space.dets();
  const auto n = static_cast<std::int64_t>(dets.size());
  std::vector<std::vector<Triplet>> per_column(dets.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t c = 0; c < n; ++c) {
    const std::uint64_t s = dets[static_cast<std::size_t>(c)].bits();
    auto& col = per_column[static_cast<std::size_t>(c)];
    for (const auto& t : h.terms()) {
      if (auto r = space.index_of(s ^ t.x_mask())) {
        col.emplace_back(static_cast<Eigen::Index>(*r), static_cast<Eigen::Index>(c),
                         t.coeff() * t.phase(s));
      }
    }
  }
  std::size_t total = 0;
  for (const auto& col : per_column) total += col.size();
  std::vector<Triplet> out;
  out.reserve(total);
  for (auto& col : per_column) out.insert(out.end(), col.begin(), col.end());
  return out;
}

void shadow_accumulate(std::span<const std::uint64_t> dets, std::uint64_t ref, int n_qubit,
                       std::span<const ShadowObservation> obs, std::span<Complex> out) {
  const auto n = static_cast<std::int64_t>(dets.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const std::uint64_t d = dets[static_cast<std::size_t>(i)];
    Complex acc = 0.0;
    for (const auto& o : obs) {
      Complex prod = static_cast<double>(o.count);
      for (int k = 0; k < n_qubit && prod != 0.0; ++k) {
        prod *= shadow_factor(o.bases[static_cast<std::size_t>(k)],
                              static_cast<int>((o.outcome >> k) & 1ULL),
                              static_cast<int>((d >> k) & 1ULL),
                              static_cast<int>((ref >> k) & 1ULL));
      }
      acc += prod;
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
}

}  // namespace canoe::kernels::omp
