#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "latticetag/errors.hpp"
#include "latticetag/opcount.hpp"
#include "latticetag/rng.hpp"

namespace latticetag {

// All supported moduli fit in 16 bits; dot products accumulate in 64
// bits so no per-term reduction is needed for m <= 2^20.
using Residue = std::uint16_t;

class ZqVector {
 public:
  ZqVector() : q_(2) {}

  ZqVector(std::vector<Residue> elems, std::uint32_t q)
      : elems_(std::move(elems)), q_(q) {
    check_range();
  }

  static ZqVector zeros(std::size_t len, std::uint32_t q) {
    return ZqVector(std::vector<Residue>(len, 0), q);
  }

  std::size_t size() const { return elems_.size(); }
  std::uint32_t modulus() const { return q_; }
  Residue operator[](std::size_t i) const { return elems_[i]; }
  const std::vector<Residue>& elems() const { return elems_; }

  bool is_zero() const {
    for (Residue e : elems_) {
      if (e != 0) return false;
    }
    return true;
  }

  bool is_binary() const {
    for (Residue e : elems_) {
      if (e > 1) return false;
    }
    return true;
  }

  bool operator==(const ZqVector&) const = default;

 private:
  void check_range() const {
    if (q_ < 2) throw ParameterError("modulus must be at least 2");
    for (Residue e : elems_) {
      if (e >= q_) {
        throw ParameterError("vector element " + std::to_string(e) +
                             " out of range for q=" + std::to_string(q_));
      }
    }
  }

  std::vector<Residue> elems_;
  std::uint32_t q_;
};

// Dense row-major matrix over Z_q.
class ZqMatrix {
 public:
  ZqMatrix() : rows_(0), cols_(0), q_(2) {}

  ZqMatrix(std::size_t rows, std::size_t cols, std::vector<Residue> elems,
           std::uint32_t q)
      : rows_(rows), cols_(cols), elems_(std::move(elems)), q_(q) {
    if (elems_.size() != rows_ * cols_) {
      throw DimensionMismatch("matrix needs rows*cols elements");
    }
    if (q_ < 2) throw ParameterError("modulus must be at least 2");
    for (Residue e : elems_) {
      if (e >= q_) throw ParameterError("matrix element out of range");
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint32_t modulus() const { return q_; }
  Residue at(std::size_t r, std::size_t c) const {
    return elems_[r * cols_ + c];
  }
  const std::vector<Residue>& elems() const { return elems_; }

  bool operator==(const ZqMatrix&) const = default;

 private:
  std::size_t rows_, cols_;
  std::vector<Residue> elems_;
  std::uint32_t q_;
};

// Secret masking permutation, stored as an index array: position i of
// the input lands at position map[i] of the output. Equivalent to the
// m x m binary matrix P with P[map[i], i] = 1.
class Permutation {
 public:
  Permutation() = default;

  explicit Permutation(std::vector<std::uint32_t> map) : map_(std::move(map)) {
    std::vector<bool> seen(map_.size(), false);
    for (std::uint32_t t : map_) {
      if (t >= map_.size() || seen[t]) {
        throw ParameterError("permutation map is not a bijection");
      }
      seen[t] = true;
    }
  }

  static Permutation identity(std::size_t m) {
    std::vector<std::uint32_t> map(m);
    std::iota(map.begin(), map.end(), 0u);
    return Permutation(std::move(map));
  }

  std::size_t size() const { return map_.size(); }
  std::uint32_t target(std::size_t i) const { return map_[i]; }
  const std::vector<std::uint32_t>& map() const { return map_; }

  bool operator==(const Permutation&) const = default;

 private:
  std::vector<std::uint32_t> map_;
};

namespace detail {
inline void require_same_shape(const ZqVector& a, const ZqVector& b,
                               const char* op) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(std::string(op) + ": lengths differ (" +
                            std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
  }
  if (a.modulus() != b.modulus()) {
    throw DimensionMismatch(std::string(op) + ": moduli differ");
  }
}
}  // namespace detail

inline ZqVector vec_add(const ZqVector& a, const ZqVector& b) {
  detail::require_same_shape(a, b, "vec_add");
  const std::uint32_t q = a.modulus();
  std::vector<Residue> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = static_cast<Residue>(
        (static_cast<std::uint32_t>(a[i]) + b[i]) % q);
  }
  ops::charge(a.size());
  return ZqVector(std::move(out), q);
}

inline ZqVector vec_sub(const ZqVector& a, const ZqVector& b) {
  detail::require_same_shape(a, b, "vec_sub");
  const std::uint32_t q = a.modulus();
  std::vector<Residue> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = static_cast<Residue>(
        (static_cast<std::uint32_t>(a[i]) + q - b[i]) % q);
  }
  ops::charge(a.size());
  return ZqVector(std::move(out), q);
}

// s is reduced mod q before use.
inline ZqVector scalar_mul(std::uint32_t s, const ZqVector& v) {
  const std::uint32_t q = v.modulus();
  const std::uint32_t sr = s % q;
  std::vector<Residue> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<Residue>((sr * static_cast<std::uint32_t>(v[i])) % q);
  }
  ops::charge(v.size());
  return ZqVector(std::move(out), q);
}

inline ZqVector mat_vec_mul(const ZqMatrix& a, const ZqVector& v) {
  if (a.cols() != v.size()) {
    throw DimensionMismatch("mat_vec_mul: matrix has " +
                            std::to_string(a.cols()) + " cols, vector has " +
                            std::to_string(v.size()) + " elements");
  }
  if (a.modulus() != v.modulus()) {
    throw DimensionMismatch("mat_vec_mul: moduli differ");
  }
  const std::uint32_t q = a.modulus();
  std::vector<Residue> out(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    std::uint64_t acc = 0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
      acc += static_cast<std::uint64_t>(a.at(r, c)) * v[c];
    }
    out[r] = static_cast<Residue>(acc % q);
  }
  ops::charge(2 * a.rows() * a.cols());
  return ZqVector(std::move(out), q);
}

inline ZqVector perm_apply(const Permutation& p, const ZqVector& v) {
  if (p.size() != v.size()) {
    throw DimensionMismatch("perm_apply: permutation size " +
                            std::to_string(p.size()) + " vs vector length " +
                            std::to_string(v.size()));
  }
  std::vector<Residue> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[p.target(i)] = v[i];
  }
  ops::charge(v.size());
  return ZqVector(std::move(out), v.modulus());
}

inline Permutation perm_invert(const Permutation& p) {
  std::vector<std::uint32_t> inv(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    inv[p.target(i)] = static_cast<std::uint32_t>(i);
  }
  return Permutation(std::move(inv));
}

// Columns of A are reindexed so that the result, as a linear map,
// equals v -> A(Pv): mat_vec_mul(mat_mul_perm(A, p), v) ==
// mat_vec_mul(A, perm_apply(p, v)).
inline ZqMatrix mat_mul_perm(const ZqMatrix& a, const Permutation& p) {
  if (a.cols() != p.size()) {
    throw DimensionMismatch("mat_mul_perm: shapes differ");
  }
  std::vector<Residue> out(a.rows() * a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) {
      out[r * a.cols() + c] = a.at(r, p.target(c));
    }
  }
  return ZqMatrix(a.rows(), a.cols(), std::move(out), a.modulus());
}

// Elements are read as the plain integers 0..q-1; no centering.
inline double norm_p(const ZqVector& v, double p) {
  if (p < 1.0) throw ParameterError("norm exponent must be >= 1");
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    acc += std::pow(static_cast<double>(v[i]), p);
  }
  return std::pow(acc, 1.0 / p);
}

inline ZqVector sample_zq_vector(Rng& rng, std::size_t len, std::uint32_t q) {
  std::vector<Residue> out(len);
  for (std::size_t i = 0; i < len; ++i) {
    out[i] = static_cast<Residue>(rng.below(q));
  }
  ops::charge(len);
  return ZqVector(std::move(out), q);
}

// Uniform over {0,1}^len, carried in Z_q so it can enter modular sums.
inline ZqVector sample_binary_vector(Rng& rng, std::size_t len,
                                     std::uint32_t q) {
  std::vector<Residue> out(len);
  for (std::size_t i = 0; i < len; ++i) {
    out[i] = static_cast<Residue>(rng.below(2));
  }
  ops::charge(len);
  return ZqVector(std::move(out), q);
}

inline Residue sample_residue(Rng& rng, std::uint32_t q) {
  ops::charge(1);
  return static_cast<Residue>(rng.below(q));
}

inline ZqMatrix sample_zq_matrix(Rng& rng, std::size_t rows, std::size_t cols,
                                 std::uint32_t q) {
  std::vector<Residue> out(rows * cols);
  for (auto& e : out) {
    e = static_cast<Residue>(rng.below(q));
  }
  return ZqMatrix(rows, cols, std::move(out), q);
}

// Fisher-Yates.
inline Permutation sample_permutation(Rng& rng, std::size_t m) {
  std::vector<std::uint32_t> map(m);
  std::iota(map.begin(), map.end(), 0u);
  for (std::size_t i = m; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(map[i - 1], map[j]);
  }
  return Permutation(std::move(map));
}

}  // namespace latticetag
