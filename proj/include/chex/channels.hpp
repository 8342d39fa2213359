#pragma once

// Quantum operations on N D-dimensional systems represented by their
// Choi matrices. The Choi matrix lives on the interleaved factor ordering
// (R1,Q1,...,RN,QN), carries the 1/D^N normalization (trace one), and the
// entry at (inter(j,l), inter(k,m)) is the action coefficient for
// Phi(|j><k|) = sum_{l,m} S_{l,j,m,k} |l><m| scaled by 1/D^N. Here
// inter(j,l) interleaves the base-D digits of the input index j (R factors)
// with those of the output index l (Q factors), slowest digit first.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chex/linalg.hpp"
#include "chex/random.hpp"
#include "chex/states.hpp"
#include "chex/tolerances.hpp"

namespace chex {

namespace detail {

// table[j * dim + l] = interleaved linear index of (j, l); dim = d^n.
inline std::vector<Index> interleaved_index_table(Index d, int n) {
  const Index dim = int_pow(d, n);
  std::vector<Index> digits_j(static_cast<size_t>(n));
  std::vector<Index> digits_l(static_cast<size_t>(n));
  std::vector<Index> table(static_cast<size_t>(dim * dim));
  for (Index j = 0; j < dim; ++j) {
    Index rem = j;
    for (int i = n - 1; i >= 0; --i) {
      digits_j[static_cast<size_t>(i)] = rem % d;
      rem /= d;
    }
    for (Index l = 0; l < dim; ++l) {
      rem = l;
      for (int i = n - 1; i >= 0; --i) {
        digits_l[static_cast<size_t>(i)] = rem % d;
        rem /= d;
      }
      Index inter = 0;
      for (int i = 0; i < n; ++i)
        inter = (inter * d + digits_j[static_cast<size_t>(i)]) * d +
                digits_l[static_cast<size_t>(i)];
      table[static_cast<size_t>(j * dim + l)] = inter;
    }
  }
  return table;
}

}  // namespace detail

struct CpCheck {
  bool cp = false;
  double min_eigenvalue = 0.0;
};

// A linear map on N D-dimensional systems, stored as its trace-one Choi
// matrix plus (D, N) metadata. Construction validates Hermiticity and unit
// trace and caches the quantities behind the CP and TP checks; instances are
// immutable afterwards.
class Channel {
 public:
  Channel(Index d, int n, ComplexMatrix choi)
      : d_(d), n_(n), choi_(std::move(choi)) {
    if (d_ < 2 || n_ < 1) throw std::invalid_argument("Channel: bad (d, n)");
    const Index expect = int_pow(d_, 2 * n_);
    if (choi_.rows() != expect || choi_.cols() != expect)
      throw std::invalid_argument("Channel: choi has wrong dimension");
    const double herm_dev = max_abs(choi_ - choi_.adjoint().eval());
    if (herm_dev > tol::herm)
      throw std::invalid_argument("Channel: choi not Hermitian (deviation " +
                                  std::to_string(herm_dev) + ")");
    const double tr_dev = std::abs(choi_.trace() - Complex(1.0));
    if (tr_dev > tol::trace)
      throw std::invalid_argument("Channel: choi trace != 1 (deviation " +
                                  std::to_string(tr_dev) + ")");
    min_choi_eig_ = hermitian_eigenvalues(choi_)(0);

    // TP <=> the R marginal of the Choi matrix is maximally mixed.
    std::vector<int> r_factors;
    for (int f = 0; f < 2 * n_; f += 2) r_factors.push_back(f);
    const ComplexMatrix r_marginal =
        partial_trace(choi_, TensorSpace::homogeneous(d_, 2 * n_), r_factors);
    const Index sys = system_dim();
    tp_dev_ = max_abs(r_marginal - ComplexMatrix::Identity(sys, sys) /
                                       static_cast<double>(sys));
  }

  Index d() const { return d_; }
  int n() const { return n_; }
  Index system_dim() const { return int_pow(d_, n_); }
  const ComplexMatrix& choi() const { return choi_; }
  double min_choi_eigenvalue() const { return min_choi_eig_; }
  double tp_deviation() const { return tp_dev_; }

 private:
  Index d_;
  int n_;
  ComplexMatrix choi_;
  double min_choi_eig_ = 0.0;
  double tp_dev_ = 0.0;
};

inline CpCheck is_cp(const Channel& c, double tol = tol::psd) {
  return {c.min_choi_eigenvalue() >= -tol, c.min_choi_eigenvalue()};
}

inline DeviationCheck is_tp(const Channel& c, double tol = tol::tp) {
  return {c.tp_deviation() <= tol, c.tp_deviation()};
}

// Phi(|j><k|) for linear basis indices j, k on the D^N-dimensional input.
inline ComplexMatrix basis_action(const Channel& c, Index j, Index k) {
  const Index dim = c.system_dim();
  if (j < 0 || j >= dim || k < 0 || k >= dim)
    throw std::invalid_argument("basis_action: index out of range");
  const std::vector<Index> inter = detail::interleaved_index_table(c.d(), c.n());
  const double scale = static_cast<double>(dim);
  ComplexMatrix out(dim, dim);
  for (Index l = 0; l < dim; ++l)
    for (Index m = 0; m < dim; ++m)
      out(l, m) = scale * c.choi()(inter[static_cast<size_t>(j * dim + l)],
                                   inter[static_cast<size_t>(k * dim + m)]);
  return out;
}

// Linear extension of the basis action to an arbitrary operator.
inline ComplexMatrix apply_matrix(const Channel& c, const ComplexMatrix& m) {
  const Index dim = c.system_dim();
  if (m.rows() != dim || m.cols() != dim)
    throw std::invalid_argument("apply_matrix: dimension mismatch");
  const std::vector<Index> inter = detail::interleaved_index_table(c.d(), c.n());
  const double scale = static_cast<double>(dim);
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (Index j = 0; j < dim; ++j)
    for (Index k = 0; k < dim; ++k) {
      const Complex mjk = m(j, k);
      if (mjk == Complex(0.0)) continue;
      for (Index l = 0; l < dim; ++l)
        for (Index mm = 0; mm < dim; ++mm)
          out(l, mm) += mjk * c.choi()(inter[static_cast<size_t>(j * dim + l)],
                                       inter[static_cast<size_t>(k * dim + mm)]);
    }
  return out * scale;
}

inline ComplexMatrix apply(const Channel& c, const DensityOperator& rho) {
  if (rho.space().total_dim() != c.system_dim())
    throw std::invalid_argument("apply: state dimension mismatch");
  return apply_matrix(c, rho.matrix());
}

// Assembles the Choi matrix of the map determined by its action on every
// basis pattern |j><k|; linearity is assumed, not checked. The action must
// be Hermiticity-preserving with unit average output trace, otherwise the
// Channel invariants reject the result.
inline Channel channel_from_action(
    Index d, int n, const std::function<ComplexMatrix(Index, Index)>& action) {
  const Index dim = int_pow(d, n);
  const std::vector<Index> inter = detail::interleaved_index_table(d, n);
  const double inv_scale = 1.0 / static_cast<double>(dim);
  ComplexMatrix choi(dim * dim, dim * dim);
  for (Index j = 0; j < dim; ++j)
    for (Index k = 0; k < dim; ++k) {
      const ComplexMatrix out = action(j, k);
      if (out.rows() != dim || out.cols() != dim)
        throw std::invalid_argument(
            "channel_from_action: output matrix dimension mismatch");
      for (Index l = 0; l < dim; ++l)
        for (Index m = 0; m < dim; ++m)
          choi(inter[static_cast<size_t>(j * dim + l)],
               inter[static_cast<size_t>(k * dim + m)]) = out(l, m) * inv_scale;
    }
  return Channel(d, n, std::move(choi));
}

// The Choi matrix as a density operator on the interleaved 2N-factor space;
// requires the channel to be CP.
inline DensityOperator jamiolkowski(const Channel& c, double tol = tol::psd) {
  if (c.min_choi_eigenvalue() < -tol)
    throw std::invalid_argument(
        "jamiolkowski: choi not positive semidefinite (min eigenvalue " +
        std::to_string(c.min_choi_eigenvalue()) + ")");
  return DensityOperator(TensorSpace::homogeneous(c.d(), 2 * c.n()), c.choi());
}

// Phi^(x)n_copies of a single-system channel. The Choi matrix of the result
// is the Kronecker power of the input's under the interleaved ordering.
inline Channel tensor_power(const Channel& c, int n_copies) {
  if (c.n() != 1) throw std::invalid_argument("tensor_power: need n == 1");
  if (n_copies < 1) throw std::invalid_argument("tensor_power: n_copies < 1");
  if (int_pow(c.d(), 2 * n_copies) > kDimensionCap)
    throw std::invalid_argument("tensor_power: dimension cap exceeded");
  return Channel(c.d(), n_copies, kron_power(c.choi(), n_copies));
}

// pi o Phi o pi^-1: simultaneous permutation of the (R_i, Q_i) pair blocks.
// Under the interleaved ordering each pair is one contiguous factor of
// dimension D^2, so this is a plain factor permutation.
inline Channel permute_channel(const Channel& c, const Permutation& p) {
  if (p.size() != c.n())
    throw std::invalid_argument("permute_channel: permutation length mismatch");
  return Channel(c.d(), c.n(),
                 permute_tensor_factors(c.choi(), p, c.d() * c.d()));
}

// Invariance of the channel under the adjacent transpositions of its copies.
inline DeviationCheck is_symmetric_channel(const Channel& c,
                                           double tol = tol::sym) {
  double dev = 0.0;
  for (int i = 0; i + 1 < c.n(); ++i) {
    const ComplexMatrix permuted = permute_tensor_factors(
        c.choi(), Permutation::transposition(c.n(), i, i + 1), c.d() * c.d());
    dev = std::max(dev, max_abs_diff(permuted, c.choi()));
  }
  return {dev <= tol, dev};
}

struct ChannelExtensionCheck {
  bool pass = false;                      // superoperator identity within tol
  double max_deviation = 0.0;             // over all basis patterns
  bool choi_marginal_pass = false;        // necessary condition, reported only
  double choi_marginal_deviation = 0.0;
};

// Checks Phi^(k)(tr_last rho) == tr_last(Phi^(k+1)(rho)) as a superoperator
// identity on every basis pattern of the (k+1)-system space. The marginal
// identity tr_last J(Phi^(k+1)) == J(Phi^(k)) is evaluated and reported
// separately; it is necessary for extendibility but not asserted equivalent.
inline ChannelExtensionCheck is_channel_extension(const Channel& ck,
                                                  const Channel& ck1,
                                                  double tol = tol::ext) {
  if (ck1.d() != ck.d())
    throw std::invalid_argument("is_channel_extension: dimension mismatch");
  if (ck1.n() != ck.n() + 1)
    throw std::invalid_argument("is_channel_extension: arity mismatch");
  const Index d = ck.d();
  const int n = ck.n();
  const Index dim_lo = ck.system_dim();
  const Index dim_hi = ck1.system_dim();
  const TensorSpace space_hi = TensorSpace::homogeneous(d, n + 1);
  std::vector<int> keep_front(static_cast<size_t>(n));
  std::iota(keep_front.begin(), keep_front.end(), 0);

  const ComplexMatrix zero = ComplexMatrix::Zero(dim_lo, dim_lo);
  double dev = 0.0;
  for (Index j = 0; j < dim_hi; ++j)
    for (Index k = 0; k < dim_hi; ++k) {
      const ComplexMatrix rhs =
          partial_trace(basis_action(ck1, j, k), space_hi, keep_front);
      const ComplexMatrix& lhs =
          (j % d == k % d) ? basis_action(ck, j / d, k / d) : zero;
      dev = std::max(dev, max_abs_diff(lhs, rhs));
    }

  std::vector<int> keep_pairs(static_cast<size_t>(2 * n));
  std::iota(keep_pairs.begin(), keep_pairs.end(), 0);
  const ComplexMatrix marginal = partial_trace(
      ck1.choi(), TensorSpace::homogeneous(d, 2 * (n + 1)), keep_pairs);
  const double marginal_dev = max_abs_diff(marginal, ck.choi());

  return {dev <= tol, dev, marginal_dev <= tol, marginal_dev};
}

// --- Constructions ---------------------------------------------------------

// Choi assembly from Kraus operators on N systems:
// choi = (1/D^N) sum_a v_a v_a^dagger with v_a[inter(j,l)] = A_a(l, j).
inline Channel channel_from_kraus(Index d, int n,
                                  const std::vector<ComplexMatrix>& kraus) {
  if (kraus.empty()) throw std::invalid_argument("channel_from_kraus: empty");
  const Index dim = int_pow(d, n);
  const std::vector<Index> inter = detail::interleaved_index_table(d, n);
  ComplexMatrix choi = ComplexMatrix::Zero(dim * dim, dim * dim);
  for (const ComplexMatrix& a : kraus) {
    if (a.rows() != dim || a.cols() != dim)
      throw std::invalid_argument("channel_from_kraus: operator shape mismatch");
    ComplexVector v(dim * dim);
    for (Index j = 0; j < dim; ++j)
      for (Index l = 0; l < dim; ++l)
        v(inter[static_cast<size_t>(j * dim + l)]) = a(l, j);
    choi += (v * v.adjoint()) / static_cast<double>(dim);
  }
  return Channel(d, n, std::move(choi));
}

inline Channel identity_channel(Index d, int n = 1) {
  const Index dim = int_pow(d, n);
  return channel_from_kraus(d, n, {ComplexMatrix::Identity(dim, dim)});
}

// Conjugation by a unitary on N = log_d(rows) systems.
inline Channel unitary_channel(Index d, const ComplexMatrix& u) {
  Index dim = u.rows();
  int n = 0;
  while (dim > 1 && dim % d == 0) {
    dim /= d;
    ++n;
  }
  if (dim != 1 || n < 1)
    throw std::invalid_argument("unitary_channel: rows not a power of d");
  const Index full = u.rows();
  if (max_abs(ComplexMatrix(u * u.adjoint()) -
              ComplexMatrix(ComplexMatrix::Identity(full, full))) > tol::tp)
    throw std::invalid_argument("unitary_channel: matrix not unitary");
  return channel_from_kraus(d, n, {u});
}

// rho -> tr(rho) I/D; the Choi matrix is exactly I / D^2.
inline Channel depolarizing_channel(Index d) {
  return Channel(d, 1,
                 ComplexMatrix::Identity(d * d, d * d) /
                     static_cast<double>(d * d));
}

// rho -> sum_k <k|rho|k> |k><k|.
inline Channel pinching_channel(Index d) {
  std::vector<ComplexMatrix> kraus;
  for (Index k = 0; k < d; ++k) {
    ComplexMatrix p = ComplexMatrix::Zero(d, d);
    p(k, k) = 1.0;
    kraus.push_back(std::move(p));
  }
  return channel_from_kraus(d, 1, kraus);
}

// rho -> sum_k gains[k] <k|rho|k> outputs[k]. With unit gains and density
// outputs this is measure-and-reprepare (TP); unbalanced gains give the
// CP-but-not-TP members used by the trace-moment machinery. The gains must
// average to one against the output traces for the Choi trace to stay one.
inline Channel measure_prepare_channel(Index d, const RealVector& gains,
                                       const std::vector<ComplexMatrix>& outputs) {
  if (gains.size() != static_cast<Index>(outputs.size()) || gains.size() != d)
    throw std::invalid_argument("measure_prepare_channel: need d entries");
  ComplexMatrix choi = ComplexMatrix::Zero(d * d, d * d);
  for (Index k = 0; k < d; ++k) {
    if (gains(k) < 0.0)
      throw std::invalid_argument("measure_prepare_channel: negative gain");
    if (outputs[static_cast<size_t>(k)].rows() != d ||
        outputs[static_cast<size_t>(k)].cols() != d)
      throw std::invalid_argument("measure_prepare_channel: output shape");
    ComplexMatrix proj = ComplexMatrix::Zero(d, d);
    proj(k, k) = 1.0;
    choi += (gains(k) / static_cast<double>(d)) *
            kron(proj, outputs[static_cast<size_t>(k)]);
  }
  return Channel(d, 1, std::move(choi));
}

// The transpose map |j><k| -> |k><j|; Hermiticity-preserving and trace
// faithful but famously not CP (its Choi matrix is SWAP/D).
inline Channel transpose_channel(Index d) {
  return channel_from_action(d, 1, [d](Index j, Index k) {
    ComplexMatrix out = ComplexMatrix::Zero(d, d);
    out(k, j) = 1.0;
    return out;
  });
}

// Random CPTP channel: a Gaussian (d * kraus_rank) x d matrix is column
// orthonormalized (two modified Gram-Schmidt sweeps) into an isometry whose
// d x d row blocks are the Kraus operators. Deterministic for a fixed seed.
inline Channel random_cptp(Index d, int kraus_rank, std::uint64_t seed) {
  if (kraus_rank < 1 || kraus_rank > d * d)
    throw std::invalid_argument("random_cptp: kraus_rank out of range");
  Rng rng(seed);
  ComplexMatrix g(d * kraus_rank, d);
  for (Index r = 0; r < g.rows(); ++r)
    for (Index c = 0; c < g.cols(); ++c) g(r, c) = rng.complex_gaussian();
  for (int sweep = 0; sweep < 2; ++sweep)
    for (Index c = 0; c < d; ++c) {
      for (Index p = 0; p < c; ++p) g.col(c) -= g.col(p).dot(g.col(c)) * g.col(p);
      g.col(c) /= g.col(c).norm();
    }
  std::vector<ComplexMatrix> kraus;
  for (int a = 0; a < kraus_rank; ++a)
    kraus.push_back(g.block(a * d, 0, d, d));
  return channel_from_kraus(d, 1, kraus);
}

// --- S-coefficient parameterization ----------------------------------------

// The D^4 action coefficients of a single-system map, flat index
// ((l*D + j)*D + m)*D + k. Stored with the 1/D Choi normalization so that
// conversions to and from Channel are exact index shuffles for every D; the
// raw action values are recovered by scaling on read.
class SVector {
 public:
  static SVector from_action_coefficients(Index d, const ComplexVector& s) {
    check_size(d, s.size());
    return SVector(d, s / static_cast<double>(d));
  }

  static SVector from_choi_normalized(Index d, ComplexVector coeffs) {
    check_size(d, coeffs.size());
    return SVector(d, std::move(coeffs));
  }

  Index d() const { return d_; }
  const ComplexVector& choi_normalized() const { return coeffs_; }

  Complex action_coefficient(Index l, Index j, Index m, Index k) const {
    return coeffs_(((l * d_ + j) * d_ + m) * d_ + k) * static_cast<double>(d_);
  }

  bool operator==(const SVector& o) const {
    return d_ == o.d_ && (coeffs_.array() == o.coeffs_.array()).all();
  }

 private:
  SVector(Index d, ComplexVector coeffs) : d_(d), coeffs_(std::move(coeffs)) {}

  static void check_size(Index d, Index size) {
    if (d < 2 || size != d * d * d * d)
      throw std::invalid_argument("SVector: need D^4 coefficients");
  }

  Index d_;
  ComplexVector coeffs_;
};

// Reassembles the single-system channel of an S vector; rejects S outside
// the admissible domain (Choi matrix not a density operator).
inline Channel phi_from_svector(const SVector& s) {
  const Index d = s.d();
  ComplexMatrix choi(d * d, d * d);
  for (Index l = 0; l < d; ++l)
    for (Index j = 0; j < d; ++j)
      for (Index m = 0; m < d; ++m)
        for (Index k = 0; k < d; ++k)
          choi(j * d + l, k * d + m) =
              s.choi_normalized()(((l * d + j) * d + m) * d + k);
  Channel c(d, 1, std::move(choi));
  if (c.min_choi_eigenvalue() < -tol::psd)
    throw std::invalid_argument(
        "phi_from_svector: S outside the admissible domain (min eigenvalue " +
        std::to_string(c.min_choi_eigenvalue()) + ")");
  return c;
}

inline SVector svector_from_phi(const Channel& c) {
  if (c.n() != 1) throw std::invalid_argument("svector_from_phi: need n == 1");
  const Index d = c.d();
  ComplexVector coeffs(d * d * d * d);
  for (Index l = 0; l < d; ++l)
    for (Index j = 0; j < d; ++j)
      for (Index m = 0; m < d; ++m)
        for (Index k = 0; k < d; ++k)
          coeffs(((l * d + j) * d + m) * d + k) = c.choi()(j * d + l, k * d + m);
  return SVector::from_choi_normalized(d, std::move(coeffs));
}

}  // namespace chex
