#pragma once

// Shared fixtures: deterministic random states/ensembles and the small
// zoo of named channels the tests keep reaching for.

#include <cmath>
#include <utility>
#include <vector>

#include "chex/chex.hpp"

namespace testutil {

using namespace chex;

inline ComplexMatrix random_density_matrix(Index dim, Rng& rng) {
  ComplexMatrix g(dim, dim);
  for (Index r = 0; r < dim; ++r)
    for (Index c = 0; c < dim; ++c) g(r, c) = rng.complex_gaussian();
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return rho;
}

inline DensityOperator random_density(const TensorSpace& space, Rng& rng) {
  return DensityOperator(space, random_density_matrix(space.total_dim(), rng));
}

inline Permutation random_permutation(int n, Rng& rng) {
  std::vector<int> images(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) images[static_cast<size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform() * (i + 1));
    std::swap(images[static_cast<size_t>(i)], images[static_cast<size_t>(j)]);
  }
  return Permutation(std::move(images));
}

inline ComplexMatrix pauli_x() {
  ComplexMatrix x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

inline ComplexMatrix pauli_y() {
  ComplexMatrix y(2, 2);
  y << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return y;
}

inline ComplexMatrix pauli_z() {
  ComplexMatrix z(2, 2);
  z << 1, 0, 0, -1;
  return z;
}

inline ComplexMatrix hadamard() {
  const double s = 1.0 / std::sqrt(2.0);
  ComplexMatrix h(2, 2);
  h << s, s, s, -s;
  return h;
}

// Columns are the eigenbasis of pauli_y.
inline ComplexMatrix y_basis() {
  const double s = 1.0 / std::sqrt(2.0);
  ComplexMatrix b(2, 2);
  b << Complex(s, 0), Complex(s, 0), Complex(0, s), Complex(0, -s);
  return b;
}

inline Channel bit_flip_channel() { return unitary_channel(2, pauli_x()); }

inline ComplexMatrix swap_matrix() {
  ComplexMatrix s = ComplexMatrix::Zero(4, 4);
  for (Index a = 0; a < 2; ++a)
    for (Index b = 0; b < 2; ++b) s(a * 2 + b, b * 2 + a) = 1.0;
  return s;
}

// Conjugation by SWAP: a two-system channel that is symmetric but extends
// no single-system channel.
inline Channel swap_conjugation() { return unitary_channel(2, swap_matrix()); }

// The CP, non-TP map rho -> 2<0|rho|0> sigma with tr[Phi(|0><0|)] = 2.
inline Channel trace_two_member(const ComplexMatrix& sigma) {
  RealVector gains(2);
  gains << 2.0, 0.0;
  return measure_prepare_channel(
      2, gains, {sigma, ComplexMatrix(ComplexMatrix::Identity(2, 2) / 2.0)});
}

inline RealVector random_simplex_point(int m, Rng& rng) {
  RealVector w(m);
  double sum = 0.0;
  for (int i = 0; i < m; ++i) {
    w(i) = 0.05 + rng.uniform();
    sum += w(i);
  }
  w /= sum;
  return w;
}

inline MixtureEnsemble random_tp_ensemble(int members, Rng& rng,
                                          Index d = 2) {
  std::vector<Channel> channels;
  for (int i = 0; i < members; ++i) {
    const int rank = 1 + static_cast<int>(rng.uniform() * static_cast<double>(d * d));
    const std::uint64_t seed = rng.raw();
    channels.push_back(random_cptp(d, rank, seed));
  }
  return MixtureEnsemble(random_simplex_point(members, rng),
                         std::move(channels), true);
}

}  // namespace testutil
