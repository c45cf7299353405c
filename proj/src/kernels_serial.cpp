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

#include <cmath>

#include "canoe/kernels.hpp"

namespace canoe::kernels {

Complex shadow_factor(std::uint8_t basis, int outcome, int a, int c) {
  // Eigenvector e = U^dag|b> of the measured basis.
  const double r = 1.0 / std::sqrt(2.0);
  Complex e[2];
  const double sign = outcome ? -1.0 : 1.0;
  switch (basis) {
    case 0:
      e[0] = r;
      e[1] = sign * r;
      break;
    case 1:
      e[0] = r;
      e[1] = Complex(0.0, sign * r);
      break;
    default:
      e[0] = outcome ? 0.0 : 1.0;
      e[1] = outcome ? 1.0 : 0.0;
      break;
  }
  return 3.0 * e[a] * std::conj(e[c]) - (a == c ? 1.0 : 0.0);
}

namespace serial {

void gather_rows(const PauliHamiltonian& h, std::span<const std::uint64_t> rows,
                 const SparseState& table, std::span<Complex> out) {
  const auto& terms = h.terms();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Complex acc = 0.0;
    for (const auto& t : terms) {
      if (const Complex* a = table.find(rows[i] ^ t.x_mask())) {
        acc += t.coeff() * std::conj(t.phase(rows[i])) * (*a);
      }
    }
    out[i] = acc;
  }
}

std::vector<Triplet> project_columns(const PauliHamiltonian& h, const RestrictedSpace& space) {
  std::vector<Triplet> out;
  out.reserve(space.size() * 4);
  const auto& dets = space.dets();
  for (std::size_t c = 0; c < dets.size(); ++c) {
    const std::uint64_t s = dets[c].bits();
    for (const auto& t : h.terms()) {
      if (auto r = space.index_of(s ^ t.x_mask())) {
        out.emplace_back(static_cast<Eigen::Index>(*r), static_cast<Eigen::Index>(c),
                         t.coeff() * t.phase(s));
      }
    }
  }
  return out;
}

void shadow_accumulate(std::span<const std::uint64_t> dets, std::uint64_t ref, int n_qubit,
                       std::span<const ShadowObservation> obs, std::span<Complex> out) {
  for (std::size_t i = 0; i < dets.size(); ++i) {
    Complex acc = 0.0;
    for (const auto& o : obs) {
      Complex prod = static_cast<double>(o.count);
      for (int k = 0; k < n_qubit && prod != 0.0; ++k) {
        prod *= shadow_factor(o.bases[static_cast<std::size_t>(k)],
                              static_cast<int>((o.outcome >> k) & 1ULL),
                              static_cast<int>((dets[i] >> k) & 1ULL),
                              static_cast<int>((ref >> k) & 1ULL));
      }
      acc += prod;
    }
    out[i] = acc;
  }
}

}  // namespace serial
}  // namespace canoe::kernels
