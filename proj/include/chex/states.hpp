#pragma once

// Density operators on multipartite spaces, permutation actions, the
// maximally entangled reference state, and the state-level exchangeability
// checks (symmetry and extendibility).

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chex/linalg.hpp"
#include "chex/tolerances.hpp"

namespace chex {

// Outcome of a deviation-style check: pass iff max_deviation <= tolerance.
struct DeviationCheck {
  bool pass = false;
  double max_deviation = 0.0;
};

// Hermitian, trace-one, positive-semidefinite matrix tagged with its
// tensor-product space. Validation happens once at construction; values are
// immutable afterwards.
class DensityOperator {
 public:
  DensityOperator(TensorSpace space, ComplexMatrix matrix)
      : space_(std::move(space)), matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols() ||
        matrix_.rows() != space_.total_dim())
      throw std::invalid_argument("DensityOperator: matrix/space mismatch");
    const double herm_dev = max_abs(matrix_ - matrix_.adjoint().eval());
    if (herm_dev > tol::herm)
      throw std::invalid_argument("DensityOperator: not Hermitian (deviation " +
                                  std::to_string(herm_dev) + ")");
    const double tr_dev = std::abs(matrix_.trace() - Complex(1.0));
    if (tr_dev > tol::trace)
      throw std::invalid_argument("DensityOperator: trace != 1 (deviation " +
                                  std::to_string(tr_dev) + ")");
    min_eig_ = hermitian_eigenvalues(matrix_)(0);
    if (min_eig_ < -tol::psd)
      throw std::invalid_argument(
          "DensityOperator: not positive semidefinite (min eigenvalue " +
          std::to_string(min_eig_) + ")");
  }

  const TensorSpace& space() const { return space_; }
  const ComplexMatrix& matrix() const { return matrix_; }
  double min_eigenvalue() const { return min_eig_; }

  double purity() const { return (matrix_ * matrix_).trace().real(); }

  static DensityOperator basis_state(Index d, Index k) {
    ComplexMatrix m = ComplexMatrix::Zero(d, d);
    m(k, k) = 1.0;
    return DensityOperator(TensorSpace({d}), std::move(m));
  }

  // Rank-one projector onto a unit vector; the amplitudes must already be
  // normalized.
  static DensityOperator pure(TensorSpace space,
                              const ComplexVector& amplitudes) {
    if (amplitudes.size() != space.total_dim())
      throw std::invalid_argument("DensityOperator::pure: length mismatch");
    ComplexMatrix m = amplitudes * amplitudes.adjoint();
    return DensityOperator(std::move(space), std::move(m));
  }

  static DensityOperator maximally_mixed(TensorSpace space) {
    const Index dim = space.total_dim();
    ComplexMatrix m =
        ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim);
    return DensityOperator(std::move(space), std::move(m));
  }

 private:
  TensorSpace space_;
  ComplexMatrix matrix_;
  double min_eig_ = 0.0;
};

// Projector onto (1/sqrt(d)) sum_k |k>|k> on a two-factor space, ancilla
// factor first.
inline DensityOperator max_entangled(Index d) {
  if (d < 2) throw std::invalid_argument("max_entangled: d < 2");
  ComplexMatrix m = ComplexMatrix::Zero(d * d, d * d);
  for (Index j = 0; j < d; ++j)
    for (Index k = 0; k < d; ++k)
      m(j * d + j, k * d + k) = 1.0 / static_cast<double>(d);
  return DensityOperator(TensorSpace({d, d}), std::move(m));
}

// The permutation action: entries of the result are r_{pi a, pi b} where
// (pi a)_i = a_{p(i)}. Equals conjugation by permutation_operator(p, d).
inline DensityOperator permute_state(const DensityOperator& rho,
                                     const Permutation& p) {
  const TensorSpace& sp = rho.space();
  if (p.size() != sp.num_factors())
    throw std::invalid_argument("permute_state: permutation length mismatch");
  if (!sp.is_homogeneous())
    throw std::invalid_argument("permute_state: factors must share one dim");
  return DensityOperator(
      sp, permute_tensor_factors(rho.matrix(), p, sp.factor_dim(0)));
}

// Invariance under the N-1 adjacent transpositions; they generate the full
// symmetric group, so this is equivalent to invariance under every
// permutation.
inline DeviationCheck is_symmetric_state(const DensityOperator& rho,
                                         double tol = tol::sym) {
  const TensorSpace& sp = rho.space();
  if (!sp.is_homogeneous())
    throw std::invalid_argument(
        "is_symmetric_state: factors must share one dim");
  const Index d = sp.factor_dim(0);
  const int n = sp.num_factors();
  double dev = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const ComplexMatrix permuted = permute_tensor_factors(
        rho.matrix(), Permutation::transposition(n, i, i + 1), d);
    dev = std::max(dev, max_abs_diff(permuted, rho.matrix()));
  }
  return {dev <= tol, dev};
}

// Does tracing the last factor out of rho_k1 reproduce rho_k?
inline DeviationCheck is_extension_of(const DensityOperator& rho_k,
                                      const DensityOperator& rho_k1,
                                      double tol = tol::ext) {
  if (rho_k1.space().num_factors() != rho_k.space().num_factors() + 1)
    throw std::invalid_argument("is_extension_of: factor-count mismatch");
  std::vector<int> keep(static_cast<size_t>(rho_k.space().num_factors()));
  std::iota(keep.begin(), keep.end(), 0);
  const ComplexMatrix marginal =
      partial_trace(rho_k1.matrix(), rho_k1.space(), keep);
  if (marginal.rows() != rho_k.matrix().rows())
    throw std::invalid_argument("is_extension_of: dimension mismatch");
  const double dev = max_abs_diff(rho_k.matrix(), marginal);
  return {dev <= tol, dev};
}

// Finite list of (weight, single-system state) pairs.
class StateEnsemble {
 public:
  StateEnsemble(std::vector<double> weights, std::vector<DensityOperator> states)
      : weights_(std::move(weights)), states_(std::move(states)) {
    if (weights_.empty() || weights_.size() != states_.size())
      throw std::invalid_argument("StateEnsemble: weights/states mismatch");
    double sum = 0.0;
    for (double w : weights_) {
      if (w < 0.0) throw std::invalid_argument("StateEnsemble: negative weight");
      sum += w;
    }
    if (std::abs(sum - 1.0) > tol::trace)
      throw std::invalid_argument("StateEnsemble: weights do not sum to 1");
    for (const DensityOperator& s : states_) {
      if (s.space().num_factors() != 1)
        throw std::invalid_argument("StateEnsemble: members must be single-system");
      if (!(s.space() == states_[0].space()))
        throw std::invalid_argument("StateEnsemble: members on different spaces");
    }
  }

  size_t size() const { return weights_.size(); }
  double weight(size_t i) const { return weights_.at(i); }
  const DensityOperator& state(size_t i) const { return states_.at(i); }
  Index d() const { return states_[0].space().factor_dim(0); }

 private:
  std::vector<double> weights_;
  std::vector<DensityOperator> states_;
};

// sum_i w_i rho_i^(x)n -- the discrete mixture of power states.
inline DensityOperator state_mixture_power(const StateEnsemble& ens, int n) {
  if (n < 1) throw std::invalid_argument("state_mixture_power: n < 1");
  const Index d = ens.d();
  const Index dim = int_pow(d, n);
  if (dim > kDimensionCap)
    throw std::invalid_argument("state_mixture_power: dimension cap exceeded");
  ComplexMatrix acc = ComplexMatrix::Zero(dim, dim);
  for (size_t i = 0; i < ens.size(); ++i)
    acc += ens.weight(i) * kron_power(ens.state(i).matrix(), n);
  return DensityOperator(TensorSpace::homogeneous(d, n), std::move(acc));
}

}  // namespace chex
