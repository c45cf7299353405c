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


#pragma once

#include <optional>
#include <string>
#include <vector>

#include "canoe/pauli.hpp"

namespace canoe::cli {

struct ToySystem {
  std::string name;
  std::string text;                // Hamiltonian file contents
  std::optional<int> electrons;    // particle sector, if any
  std::vector<double> spectrum;    // closed-form eigenvalues, ascending; empty if none
};

const std::vector<ToySystem>& toy_systems();
const ToySystem& toy_system(const std::string& name);

/// "builtin:<name>" resolves to a toy; anything else is read as a file.
PauliHamiltonian resolve_hamiltonian(const std::string& source);

}  // namespace canoe::cli
