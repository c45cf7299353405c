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

#include "canoe/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "canoe/errors.hpp"

namespace canoe {

std::uint64_t width_mask(int n_qubit) noexcept {
  return n_qubit >= 64 ? ~0ULL : ((1ULL << n_qubit) - 1ULL);
}

Determinant::Determinant(std::uint64_t bits, int n_qubit) : bits_(bits), n_qubit_(n_qubit) {
  if (n_qubit < 1 || n_qubit > kMaxQubits) {
    throw ContractError("determinant width must be in [1, 64], got " + std::to_string(n_qubit));
  }
  if (bits & ~width_mask(n_qubit)) {
    throw ContractError("determinant has bits set beyond width " + std::to_string(n_qubit));
  }
}

Determinant Determinant::from_string(std::string_view text) {
  if (text.empty() || text.size() > static_cast<std::size_t>(kMaxQubits)) {
    throw ContractError("determinant string must have 1..64 characters");
  }
  std::uint64_t bits = 0;
  for (std::size_t k = 0; k < text.size(); ++k) {
    if (text[k] == '1') {
      bits |= 1ULL << k;
    } else if (text[k] != '0') {
      throw ContractError("determinant string may only contain 0 and 1: '" + std::string(text) + "'");
    }
  }
  return Determinant(bits, static_cast<int>(text.size()));
}

int Determinant::popcount() const noexcept { return std::popcount(bits_); }

std::string Determinant::to_string() const {
  std::string out(static_cast<std::size_t>(n_qubit_), '0');
  for (int k = 0; k < n_qubit_; ++k) {
    if (test(k)) out[static_cast<std::size_t>(k)] = '1';
  }
  return out;
}

PauliTerm::PauliTerm(Complex coeff, std::uint64_t x_mask, std::uint64_t z_mask, int n_qubit)
    : coeff_(coeff), x_mask_(x_mask), z_mask_(z_mask), n_qubit_(n_qubit) {
  if (n_qubit < 1 || n_qubit > kMaxQubits) {
    throw ContractError("Pauli term width must be in [1, 64]");
  }
  if ((x_mask | z_mask) & ~width_mask(n_qubit)) {
    throw ContractError("Pauli masks exceed the term width");
  }
}

PauliTerm PauliTerm::from_string(Complex coeff, std::string_view ops) {
  if (ops.empty() || ops.size() > static_cast<std::size_t>(kMaxQubits)) {
    throw ContractError("Pauli word must have 1..64 characters");
  }
  std::uint64_t x = 0;
  std::uint64_t z = 0;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const std::uint64_t bit = 1ULL << k;
    switch (ops[k]) {
      case 'I': break;
      case 'X': x |= bit; break;
      case 'Y': x |= bit; z |= bit; break;
      case 'Z': z |= bit; break;
      default:
        throw ContractError("Pauli word may only contain I, X, Y, Z: '" + std::string(ops) + "'");
    }
  }
  return PauliTerm(coeff, x, z, static_cast<int>(ops.size()));
}

int PauliTerm::y_count() const noexcept { return std::popcount(x_mask_ & z_mask_); }

std::string PauliTerm::to_string() const {
  std::string out(static_cast<std::size_t>(n_qubit_), 'I');
  for (int k = 0; k < n_qubit_; ++k) {
    const bool x = (x_mask_ >> k) & 1ULL;
    const bool z = (z_mask_ >> k) & 1ULL;
    out[static_cast<std::size_t>(k)] = x ? (z ? 'Y' : 'X') : (z ? 'Z' : 'I');
  }
  return out;
}

Complex PauliTerm::phase(std::uint64_t s) const noexcept {
  // Only the parity of z.s matters.
  const int quarter_turns = (y_count() + 2 * (std::popcount(z_mask_ & s) & 1)) & 3;
  switch (quarter_turns) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

PhasedDeterminant apply_pauli_to_det(const PauliTerm& term, const Determinant& s) {
  if (term.n_qubit() != s.n_qubit()) {
    throw ContractError("Pauli term acts on " + std::to_string(term.n_qubit()) +
                        " qubits but determinant has " + std::to_string(s.n_qubit()));
  }
  return {Determinant(s.bits() ^ term.x_mask(), s.n_qubit()), term.phase(s.bits())};
}

PauliHamiltonian::PauliHamiltonian(std::vector<PauliTerm> terms, int n_qubit) : n_qubit_(n_qubit) {
  if (n_qubit < 1 || n_qubit > kMaxQubits) {
    throw FormatError("Hamiltonian width must be in [1, 64]");
  }
  std::map<std::string, Complex> merged;
  for (const auto& t : terms) {
    if (t.n_qubit() != n_qubit) {
      throw FormatError("Pauli term '" + t.to_string() + "' does not match Hamiltonian width " +
                        std::to_string(n_qubit));
    }
    merged[t.to_string()] += t.coeff();
  }
  terms_.reserve(merged.size());
  for (const auto& [word, c] : merged) {
    if (std::abs(c.imag()) > 1e-12) {
      throw FormatError("coefficient of Hermitian string " + word + " has imaginary part " +
                        std::to_string(c.imag()) + "; H would not be Hermitian");
    }
    if (c.real() == 0.0) continue;
    terms_.push_back(PauliTerm::from_string(Complex(c.real(), 0.0), word));
  }
  double sq = 0.0;
  for (const auto& t : terms_) {
    norm_1_ += std::abs(t.coeff());
    sq += std::norm(t.coeff());
  }
  norm_2_ = std::sqrt(sq);
}

std::string PauliHamiltonian::to_text() const {
  std::ostringstream out;
  out.precision(17);
  for (const auto& t : terms_) {
    out << t.coeff().real() << ' ' << t.coeff().imag() << ' ' << t.to_string() << '\n';
  }
  return out.str();
}

PauliHamiltonian parse_hamiltonian(std::istream& in) {
  std::vector<PauliTerm> terms;
  std::string line;
  std::size_t line_no = 0;
  int width = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    double re = 0.0;
    double im = 0.0;
    std::string word;
    std::string extra;
    if (!(fields >> re >> im >> word)) {
      throw ParseError(line_no, "expected '<re> <im> <pauli word>', got '" + line + "'");
    }
    if (fields >> extra) {
      throw ParseError(line_no, "unexpected trailing field '" + extra + "'");
    }
    if (word.find_first_not_of("IXYZ") != std::string::npos || word.size() > 64) {
      throw ParseError(line_no, "invalid Pauli word '" + word + "'");
    }
    if (width < 0) {
      width = static_cast<int>(word.size());
    } else if (static_cast<int>(word.size()) != width) {
      throw FormatError("line " + std::to_string(line_no) + ": Pauli word has length " +
                        std::to_string(word.size()) + ", expected " + std::to_string(width));
    }
    terms.push_back(PauliTerm::from_string(Complex(re, im), word));
  }
  if (width < 0) throw FormatError("Hamiltonian input contains no terms");
  return PauliHamiltonian(std::move(terms), width);
}

PauliHamiltonian parse_hamiltonian(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_hamiltonian(in);
}

PauliHamiltonian load_hamiltonian(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open Hamiltonian file " + path.string());
  return parse_hamiltonian(in);
}

namespace {

Eigen::Matrix2cd single_qubit(bool x, bool z) {
  const Complex i(0.0, 1.0);
  Eigen::Matrix2cd m;
  if (!x && !z) {
    m << 1, 0, 0, 1;
  } else if (x && !z) {
    m << 0, 1, 1, 0;
  } else if (x && z) {
    m << 0, -i, i, 0;
  } else {
    m << 1, 0, 0, -1;
  }
  return m;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::Matrix2cd& b) {
  Eigen::MatrixXcd out(a.rows() * 2, a.cols() * 2);
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      out.block<2, 2>(2 * r, 2 * c) = a(r, c) * b;
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXcd to_dense(const PauliHamiltonian& h) {
  const int n = h.n_qubit();
  if (n > kDenseQubitLimit) {
    throw SizeLimitError("to_dense supports at most " + std::to_string(kDenseQubitLimit) +
                         " qubits, Hamiltonian has " + std::to_string(n));
  }
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : h.terms()) {
    // Qubit n-1 is the most significant factor so that row index == bits.
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Constant(1, 1, t.coeff());
    for (int k = n - 1; k >= 0; --k) {
      m = kron(m, single_qubit((t.x_mask() >> k) & 1ULL, (t.z_mask() >> k) & 1ULL));
    }
    out += m;
  }
  return out;
}

}  // namespace canoe
