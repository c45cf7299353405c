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

#include <Eigen/Dense>

#include <complex>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace canoe {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 64;
inline constexpr int kDenseQubitLimit = 12;

/// Occupation bitstring. Bit k is spin orbital k, which is character k
/// (counting from the left) of the textual form.
class Determinant {
 public:
  Determinant() = default;
  Determinant(std::uint64_t bits, int n_qubit);

  static Determinant from_string(std::string_view text);

  std::uint64_t bits() const noexcept { return bits_; }
  int n_qubit() const noexcept { return n_qubit_; }
  int popcount() const noexcept;
  bool test(int k) const noexcept { return (bits_ >> k) & 1ULL; }
  std::string to_string() const;

  friend bool operator==(const Determinant&, const Determinant&) = default;
  friend auto operator<=>(const Determinant& a, const Determinant& b) {
    if (auto c = a.n_qubit_ <=> b.n_qubit_; c != 0) return c;
    return a.bits_ <=> b.bits_;
  }

 private:
  std::uint64_t bits_ = 0;
  int n_qubit_ = 1;
};

std::uint64_t width_mask(int n_qubit) noexcept;

struct PhasedDeterminant {
  Determinant det;
  Complex phase;
};

/// Weighted Pauli string in symplectic form: x_mask marks X/Y sites,
/// z_mask marks Z/Y sites.
class PauliTerm {
 public:
  PauliTerm(Complex coeff, std::uint64_t x_mask, std::uint64_t z_mask, int n_qubit);

  /// `ops` is a word over {I,X,Y,Z}; character k acts on qubit k.
  static PauliTerm from_string(Complex coeff, std::string_view ops);

  Complex coeff() const noexcept { return coeff_; }
  std::uint64_t x_mask() const noexcept { return x_mask_; }
  std::uint64_t z_mask() const noexcept { return z_mask_; }
  int n_qubit() const noexcept { return n_qubit_; }
  int y_count() const noexcept;
  bool is_identity() const noexcept { return x_mask_ == 0 && z_mask_ == 0; }
  std::string to_string() const;

  /// theta(s) = i^{y_count} (-1)^{popcount(z_mask & s)}, so that
  /// P|s> = theta(s) |s ^ x_mask>.
  Complex phase(std::uint64_t s) const noexcept;

  PauliTerm with_coeff(Complex c) const { return PauliTerm(c, x_mask_, z_mask_, n_qubit_); }

 private:
  Complex coeff_;
  std::uint64_t x_mask_;
  std::uint64_t z_mask_;
  int n_qubit_;
};

PhasedDeterminant apply_pauli_to_det(const PauliTerm& term, const Determinant& s);

/// H = sum_g h_g P_g with duplicates merged, real coefficients, terms sorted
/// lexicographically by their IXYZ word.
class PauliHamiltonian {
 public:
  PauliHamiltonian(std::vector<PauliTerm> terms, int n_qubit);

  const std::vector<PauliTerm>& terms() const noexcept { return terms_; }
  int n_qubit() const noexcept { return n_qubit_; }
  std::size_t n_terms() const noexcept { return terms_.size(); }
  double norm_1() const noexcept { return norm_1_; }
  double norm_2() const noexcept { return norm_2_; }

  std::string to_text() const;

 private:
  std::vector<PauliTerm> terms_;
  int n_qubit_;
  double norm_1_ = 0.0;
  double norm_2_ = 0.0;
};

/// Lines of `<re> <im> <word>`; blank lines and `#` comments are skipped.
PauliHamiltonian parse_hamiltonian(std::istream& in);
PauliHamiltonian parse_hamiltonian(std::string_view text);
PauliHamiltonian load_hamiltonian(const std::filesystem::path& path);

/// Dense 2^n x 2^n matrix built from Kronecker products; row index is the
/// determinant bit value. Limited to kDenseQubitLimit qubits.
Eigen::MatrixXcd to_dense(const PauliHamiltonian& h);

}  // namespace canoe
