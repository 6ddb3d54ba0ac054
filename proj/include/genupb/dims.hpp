#pragma once

#include <stdexcept>
#include <string>

namespace genupb {

/// Invalid argument supplied by the caller (bad dimension, non-finite entry, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operand shapes that do not agree with each other.
class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

/// Subsystem dimensions of a bipartite system C^nA (x) C^nB.
///
/// The composite index of the basis vector e_a (x) e_b is a * nB + b. Every
/// routine in the library (kron, partial transpose, partial traces, file
/// formats) uses this pairing.
class BipartiteDims {
 public:
  BipartiteDims(int nA, int nB) : nA_(nA), nB_(nB) {
    if (nA < 2 || nB < 2) {
      throw InputError("BipartiteDims: subsystem dimensions must be >= 2, got " +
                       std::to_string(nA) + "x" + std::to_string(nB));
    }
  }

  int nA() const { return nA_; }
  int nB() const { return nB_; }
  int total() const { return nA_ * nB_; }
  int index(int a, int b) const { return a * nB_ + b; }

  bool operator==(const BipartiteDims&) const = default;

  std::string str() const { return std::to_string(nA_) + "x" + std::to_string(nB_); }

 private:
  int nA_;
  int nB_;
};

}  // namespace genupb
