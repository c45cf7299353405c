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


#include "cli/toys.hpp"

#include <cmath>
#include <sstream>

#include "canoe/errors.hpp"

namespace canoe::cli {

namespace {

std::string pair_word(int n, int a, char pa, int b, char pb) {
  std::string w(static_cast<std::size_t>(n), 'I');
  w[static_cast<std::size_t>(a)] = pa;
  w[static_cast<std::size_t>(b)] = pb;
  return w;
}

// Number-conserving chain: hopping (XX + YY)/2, ZZ couplings and site fields.
std::string hopping_chain(int n, const std::vector<double>& hop, const std::vector<double>& zz,
                          const std::vector<double>& field, double next_hop) {
  std::ostringstream out;
  out.precision(17);
  out << "# number-conserving hopping chain on " << n << " sites\n";
  for (int k = 0; k + 1 < n; ++k) {
    out << 0.5 * hop[static_cast<std::size_t>(k)] << " 0 " << pair_word(n, k, 'X', k + 1, 'X') << "\n";
    out << 0.5 * hop[static_cast<std::size_t>(k)] << " 0 " << pair_word(n, k, 'Y', k + 1, 'Y') << "\n";
    out << zz[static_cast<std::size_t>(k)] << " 0 " << pair_word(n, k, 'Z', k + 1, 'Z') << "\n";
  }
  for (int k = 0; k + 2 < n; ++k) {
    out << 0.5 * next_hop << " 0 " << pair_word(n, k, 'X', k + 2, 'X') << "\n";
    out << 0.5 * next_hop << " 0 " << pair_word(n, k, 'Y', k + 2, 'Y') << "\n";
  }
  for (int k = 0; k < n; ++k) {
    std::string w(static_cast<std::size_t>(n), 'I');
    w[static_cast<std::size_t>(k)] = 'Z';
    out << field[static_cast<std::size_t>(k)] << " 0 " << w << "\n";
  }
  return out.str();
}

std::vector<ToySystem> build() {
  std::vector<ToySystem> toys;
  toys.push_back({"z1", "1.0 0.0 Z\n", std::nullopt, {-1.0, 1.0}});
  const double r = std::sqrt(0.5);
  toys.push_back({"zx1", "0.5 0.0 Z\n0.5 0.0 X\n", std::nullopt, {-r, r}});
  toys.push_back({"heis2", "1.0 0.0 XX\n1.0 0.0 YY\n1.0 0.0 ZZ\n", std::nullopt, {-3.0, 1.0, 1.0, 1.0}});
  toys.push_back({"xy4",
                  hopping_chain(4, {0.9, 1.1, 0.7}, {0.3, 0.2, 0.25}, {0.4, -0.3, 0.2, -0.5}, 0.35),
                  2,
                  {}});
  toys.push_back({"xy6",
                  hopping_chain(6, {0.9, 1.1, 0.7, 1.0, 0.8}, {0.3, 0.2, 0.25, 0.15, 0.35},
                                {0.4, -0.3, 0.2, -0.5, 0.1, -0.2}, 0.35),
                  3,
                  {}});
  return toys;
}

}  // namespace

const std::vector<ToySystem>& toy_systems() {
  static const std::vector<ToySystem> toys = build();
  return toys;
}

const ToySystem& toy_system(const std::string& name) {
  for (const auto& t : toy_systems()) {
    if (t.name == name) return t;
  }
  throw ConfigError("unknown builtin system '" + name + "'");
}

PauliHamiltonian resolve_hamiltonian(const std::string& source) {
  constexpr std::string_view prefix = "builtin:";
  if (source.rfind(prefix, 0) == 0) return parse_hamiltonian(toy_system(source.substr(prefix.size())).text);
  return load_hamiltonian(source);
}

}  // namespace canoe::cli
