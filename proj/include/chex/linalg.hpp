#pragma once

// Dense complex linear algebra on small tensor-product spaces: Kronecker
// products, partial traces, Hermitian spectra, and permutation operators on
// tensor factors. Storage is row-major; factor 0 is the slowest-varying
// tensor index throughout.

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chex/tolerances.hpp"

namespace chex {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using ComplexMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Total-dimension cap for tensor powers; keeps every dense check fast.
inline constexpr Index kDimensionCap = 4096;

inline Index int_pow(Index base, int exp) {
  Index r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  return max_abs(a - b);
}

inline bool is_hermitian(const ComplexMatrix& m, double tol = tol::herm) {
  return m.rows() == m.cols() &&
         max_abs(m - m.adjoint().eval()) <= tol;
}

// An ordered list of subsystem dimensions with precomputed strides.
class TensorSpace {
 public:
  explicit TensorSpace(std::vector<Index> factor_dims)
      : dims_(std::move(factor_dims)) {
    if (dims_.empty()) throw std::invalid_argument("TensorSpace: no factors");
    for (Index d : dims_)
      if (d < 1) throw std::invalid_argument("TensorSpace: factor dim < 1");
    strides_.assign(dims_.size(), 1);
    for (int f = static_cast<int>(dims_.size()) - 2; f >= 0; --f)
      strides_[f] = strides_[f + 1] * dims_[f + 1];
    total_ = strides_[0] * dims_[0];
  }

  static TensorSpace homogeneous(Index d, int n_factors) {
    return TensorSpace(std::vector<Index>(static_cast<size_t>(n_factors), d));
  }

  Index total_dim() const { return total_; }
  int num_factors() const { return static_cast<int>(dims_.size()); }
  const std::vector<Index>& factor_dims() const { return dims_; }
  Index factor_dim(int f) const { return dims_.at(static_cast<size_t>(f)); }
  Index stride(int f) const { return strides_.at(static_cast<size_t>(f)); }

  bool is_homogeneous() const {
    return std::all_of(dims_.begin(), dims_.end(),
                       [&](Index d) { return d == dims_[0]; });
  }

  bool operator==(const TensorSpace& o) const { return dims_ == o.dims_; }

 private:
  std::vector<Index> dims_;
  std::vector<Index> strides_;
  Index total_ = 0;
};

// A bijection on {0,...,N-1}; images[i] is where position i is sent.
class Permutation {
 public:
  explicit Permutation(std::vector<int> images) : images_(std::move(images)) {
    std::vector<bool> seen(images_.size(), false);
    for (int v : images_) {
      if (v < 0 || v >= static_cast<int>(images_.size()) || seen[v])
        throw std::invalid_argument("Permutation: images not a bijection");
      seen[v] = true;
    }
  }

  static Permutation identity(int n) {
    std::vector<int> im(static_cast<size_t>(n));
    std::iota(im.begin(), im.end(), 0);
    return Permutation(std::move(im));
  }

  static Permutation transposition(int n, int a, int b) {
    Permutation p = identity(n);
    std::swap(p.images_.at(a), p.images_.at(b));
    return p;
  }

  int size() const { return static_cast<int>(images_.size()); }
  int operator()(int i) const { return images_.at(static_cast<size_t>(i)); }
  const std::vector<int>& images() const { return images_; }

  Permutation inverse() const {
    std::vector<int> im(images_.size());
    for (int i = 0; i < size(); ++i) im[images_[i]] = i;
    return Permutation(std::move(im));
  }

  // (p.compose(q))(i) == p(q(i))
  Permutation compose(const Permutation& q) const {
    if (q.size() != size())
      throw std::invalid_argument("Permutation::compose: size mismatch");
    std::vector<int> im(images_.size());
    for (int i = 0; i < size(); ++i) im[i] = images_[q(i)];
    return Permutation(std::move(im));
  }

  bool operator==(const Permutation& o) const { return images_ == o.images_; }

 private:
  std::vector<int> images_;
};

// (a (x) b)[(i*rb + k), (j*cb + l)] = a(i, j) * b(k, l)
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      for (Index k = 0; k < b.rows(); ++k)
        for (Index l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

inline ComplexMatrix kron_power(const ComplexMatrix& a, int n) {
  if (n < 1) throw std::invalid_argument("kron_power: n < 1");
  ComplexMatrix out = a;
  for (int i = 1; i < n; ++i) out = kron(out, a);
  return out;
}

// Traces out every factor not listed in `keep`; kept factors stay in their
// original order. Tracing out everything yields the 1x1 matrix [trace(m)].
inline ComplexMatrix partial_trace(const ComplexMatrix& m,
                                   const TensorSpace& space,
                                   const std::vector<int>& keep) {
  if (m.rows() != m.cols() || m.rows() != space.total_dim())
    throw std::invalid_argument("partial_trace: matrix does not live on space");
  std::vector<int> kept(keep);
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  for (int f : kept)
    if (f < 0 || f >= space.num_factors())
      throw std::invalid_argument("partial_trace: keep index out of range");
  std::vector<int> traced;
  for (int f = 0; f < space.num_factors(); ++f)
    if (!std::binary_search(kept.begin(), kept.end(), f)) traced.push_back(f);

  // Linear offsets contributed by each subspace, so that a full-space index
  // decomposes as kept_offset + traced_offset.
  auto offsets = [&](const std::vector<int>& factors) {
    Index sub_dim = 1;
    for (int f : factors) sub_dim *= space.factor_dim(f);
    std::vector<Index> off(static_cast<size_t>(sub_dim), 0);
    for (Index lin = 0; lin < sub_dim; ++lin) {
      Index rem = lin, acc = 0;
      for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
        acc += (rem % space.factor_dim(*it)) * space.stride(*it);
        rem /= space.factor_dim(*it);
      }
      off[static_cast<size_t>(lin)] = acc;
    }
    return off;
  };
  const std::vector<Index> kept_off = offsets(kept);
  const std::vector<Index> traced_off = offsets(traced);

  const Index out_dim = static_cast<Index>(kept_off.size());
  ComplexMatrix out = ComplexMatrix::Zero(out_dim, out_dim);
  for (Index r = 0; r < out_dim; ++r)
    for (Index c = 0; c < out_dim; ++c) {
      Complex acc = 0.0;
      for (Index t : traced_off) acc += m(kept_off[r] + t, kept_off[c] + t);
      out(r, c) = acc;
    }
  return out;
}

// Ascending real spectrum of a Hermitian matrix; rejects input whose
// anti-Hermitian part exceeds tol_herm.
inline RealVector hermitian_eigenvalues(const ComplexMatrix& m,
                                        double tol_herm = tol::herm) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("hermitian_eigenvalues: not square");
  const double dev = max_abs(m - m.adjoint().eval());
  if (dev > tol_herm)
    throw std::invalid_argument(
        "hermitian_eigenvalues: input not Hermitian (deviation " +
        std::to_string(dev) + ")");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m,
                                                      Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("hermitian_eigenvalues: solver failed");
  return solver.eigenvalues();
}

// map[a] = linear index of the multi-index (a_{p(0)}, ..., a_{p(N-1)}) on N
// homogeneous factors of dimension d. This is the index remap realizing the
// permutation action on states: permuted(i, j) = m(map[i], map[j]).
inline std::vector<Index> permuted_index_map(const Permutation& p, Index d) {
  const int n = p.size();
  const Index dim = int_pow(d, n);
  std::vector<Index> digits(static_cast<size_t>(n));
  std::vector<Index> map(static_cast<size_t>(dim));
  for (Index a = 0; a < dim; ++a) {
    Index rem = a;
    for (int i = n - 1; i >= 0; --i) {
      digits[static_cast<size_t>(i)] = rem % d;
      rem /= d;
    }
    Index out = 0;
    for (int i = 0; i < n; ++i) out = out * d + digits[static_cast<size_t>(p(i))];
    map[static_cast<size_t>(a)] = out;
  }
  return map;
}

inline ComplexMatrix permute_tensor_factors(const ComplexMatrix& m,
                                            const Permutation& p, Index d) {
  const std::vector<Index> map = permuted_index_map(p, d);
  const Index dim = static_cast<Index>(map.size());
  if (m.rows() != dim || m.cols() != dim)
    throw std::invalid_argument("permute_tensor_factors: shape mismatch");
  ComplexMatrix out(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) out(i, j) = m(map[i], map[j]);
  return out;
}

// The unitary P with P (v_1 (x) ... (x) v_N) = v_{p^-1(1)} (x) ... (x)
// v_{p^-1(N)}, built exactly as a 0/1 matrix by index remapping.
inline ComplexMatrix permutation_operator(const Permutation& p, Index d) {
  const std::vector<Index> map = permuted_index_map(p, d);
  const Index dim = static_cast<Index>(map.size());
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (Index a = 0; a < dim; ++a) out(a, map[a]) = 1.0;
  return out;
}

}  // namespace chex
