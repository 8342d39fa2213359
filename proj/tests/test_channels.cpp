#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "helpers.hpp"

using namespace chex;
using testutil::bit_flip_channel;
using testutil::random_density;
using testutil::random_density_matrix;
using testutil::swap_conjugation;
using testutil::trace_two_member;

namespace {

ComplexMatrix basis_pattern(Index dim, Index j, Index k) {
  ComplexMatrix e = ComplexMatrix::Zero(dim, dim);
  e(j, k) = 1.0;
  return e;
}

// Two-system channel whose copies are two independent single-system maps.
Channel pair_channel(const Channel& a, const Channel& b) {
  return Channel(a.d(), 2, kron(a.choi(), b.choi()));
}

}  // namespace

TEST_CASE("channel_from_action of the identity is the maximally entangled state") {
  const Channel id = channel_from_action(2, 1, [](Index j, Index k) {
    return basis_pattern(2, j, k);
  });
  CHECK(max_abs_diff(id.choi(), max_entangled(2).matrix()) == 0.0);
  CHECK(max_abs_diff(id.choi(), identity_channel(2).choi()) == 0.0);
}

TEST_CASE("channel_from_action of complete depolarization is maximally mixed") {
  const Channel dep = channel_from_action(2, 1, [](Index j, Index k) {
    return ComplexMatrix((j == k ? 0.5 : 0.0) *
                         ComplexMatrix::Identity(2, 2));
  });
  CHECK(max_abs_diff(dep.choi(),
                     ComplexMatrix(ComplexMatrix::Identity(4, 4) / 4.0)) == 0.0);
  CHECK(max_abs_diff(dep.choi(), depolarizing_channel(2).choi()) == 0.0);
}

TEST_CASE("the transpose map has choi SWAP/2 and fails the positivity test") {
  const Channel t = transpose_channel(2);
  CHECK(max_abs_diff(t.choi(), ComplexMatrix(testutil::swap_matrix() / 2.0)) ==
        0.0);
  const CpCheck cp = is_cp(t);
  CHECK_FALSE(cp.cp);
  CHECK(std::abs(cp.min_eigenvalue - (-0.5)) <= 1e-10);
  CHECK_THROWS_AS(jamiolkowski(t), std::invalid_argument);
}

TEST_CASE("Channel constructor validates its matrix") {
  ComplexMatrix not_herm = ComplexMatrix::Zero(4, 4);
  not_herm(0, 0) = 1.0;
  not_herm(0, 1) = 0.5;
  CHECK_THROWS_AS(Channel(2, 1, not_herm), std::invalid_argument);
  CHECK_THROWS_AS(Channel(2, 1, ComplexMatrix(ComplexMatrix::Identity(4, 4))),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      Channel(2, 2, ComplexMatrix(ComplexMatrix::Identity(4, 4) / 4.0)),
      std::invalid_argument);
}

TEST_CASE("jamiolkowski pinned images") {
  CHECK(max_abs_diff(jamiolkowski(identity_channel(2)).matrix(),
                     max_entangled(2).matrix()) == 0.0);

  // Bit-flip conjugation: rank-one projector onto (|01> + |10>)/sqrt(2).
  const ComplexMatrix bf = jamiolkowski(bit_flip_channel()).matrix();
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected(1, 1) = expected(1, 2) = expected(2, 1) = expected(2, 2) = 0.5;
  CHECK(max_abs_diff(bf, expected) == 0.0);
}

TEST_CASE("tensor products have interleaved kron chois") {
  Rng rng(301);
  const Channel a = random_cptp(2, 2, rng.raw());
  const Channel b = random_cptp(2, 3, rng.raw());
  const Channel ab = pair_channel(a, b);
  CHECK(max_abs_diff(jamiolkowski(ab).matrix(), kron(a.choi(), b.choi())) ==
        0.0);
}

TEST_CASE("apply recovers pinned channel actions") {
  Rng rng(302);
  const DensityOperator rho = random_density(TensorSpace({2}), rng);
  CHECK(max_abs_diff(apply(identity_channel(2), rho), rho.matrix()) < 1e-14);

  CHECK(max_abs_diff(
            apply(depolarizing_channel(2), DensityOperator::basis_state(2, 0)),
            ComplexMatrix(ComplexMatrix::Identity(2, 2) / 2.0)) < 1e-14);

  CHECK(max_abs_diff(apply(bit_flip_channel(), DensityOperator::basis_state(2, 0)),
                     DensityOperator::basis_state(2, 1).matrix()) < 1e-14);

  CHECK_THROWS_AS(apply(identity_channel(2), max_entangled(2)),
                  std::invalid_argument);
}

TEST_CASE("unitary conjugation acts by conjugation") {
  Rng rng(303);
  const Channel had = unitary_channel(2, testutil::hadamard());
  const DensityOperator rho = random_density(TensorSpace({2}), rng);
  const ComplexMatrix expected =
      testutil::hadamard() * rho.matrix() * testutil::hadamard().adjoint();
  CHECK(max_abs_diff(apply(had, rho), expected) < 1e-14);

  ComplexMatrix not_unitary = ComplexMatrix::Identity(2, 2);
  not_unitary(0, 0) = 2.0;
  CHECK_THROWS_AS(unitary_channel(2, not_unitary), std::invalid_argument);
  CHECK_THROWS_AS(unitary_channel(2, ComplexMatrix(ComplexMatrix::Identity(3, 3))),
                  std::invalid_argument);
}

TEST_CASE("action, choi, action round trip is exact to 1e-12") {
  Rng rng(304);
  for (const Index d : {Index(2), Index(3)}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Channel c =
          random_cptp(d, 1 + static_cast<int>(rng.raw() % (d * d)), rng.raw());
      const Channel rebuilt = channel_from_action(d, 1, [&](Index j, Index k) {
        return apply_matrix(c, basis_pattern(d, j, k));
      });
      CHECK(max_abs_diff(rebuilt.choi(), c.choi()) <= 1e-12);
    }
  }
}

TEST_CASE("basis_action matches apply_matrix on patterns") {
  Rng rng(305);
  const Channel c = random_cptp(2, 4, rng.raw());
  for (Index j = 0; j < 2; ++j)
    for (Index k = 0; k < 2; ++k)
      CHECK(max_abs_diff(basis_action(c, j, k),
                         apply_matrix(c, basis_pattern(2, j, k))) == 0.0);
}

TEST_CASE("tensor_power structure and action") {
  const Channel id2 = tensor_power(identity_channel(2), 2);
  CHECK(max_abs_diff(id2.choi(), kron(max_entangled(2).matrix(),
                                      max_entangled(2).matrix())) == 0.0);

  Rng rng(306);
  const Channel c = random_cptp(2, 2, rng.raw());
  const Channel c2 = tensor_power(c, 2);
  CHECK(is_tp(c2).pass);

  const DensityOperator rho1 = random_density(TensorSpace({2}), rng);
  const DensityOperator rho2 = random_density(TensorSpace({2}), rng);
  const ComplexMatrix lhs = apply_matrix(c2, kron(rho1.matrix(), rho2.matrix()));
  const ComplexMatrix rhs = kron(apply(c, rho1), apply(c, rho2));
  CHECK(max_abs_diff(lhs, rhs) <= 1e-10);

  const Channel dep2 = tensor_power(depolarizing_channel(2), 2);
  CHECK(max_abs_diff(apply(dep2, max_entangled(2)),
                     ComplexMatrix(ComplexMatrix::Identity(4, 4) / 4.0)) <
        1e-12);

  CHECK_THROWS_AS(tensor_power(c2, 2), std::invalid_argument);
  CHECK_THROWS_AS(tensor_power(c, 7), std::invalid_argument);
}

TEST_CASE("is_cp accepts mixtures and rejects the transpose map") {
  CHECK(is_cp(identity_channel(2)).cp);
  CHECK(std::abs(is_cp(identity_channel(2)).min_eigenvalue) < 1e-12);
  CHECK(is_cp(depolarizing_channel(2)).cp);
  CHECK(is_cp(pinching_channel(2)).cp);

  Rng rng(307);
  const Channel a = random_cptp(2, 2, rng.raw());
  const Channel b = random_cptp(2, 3, rng.raw());
  const Channel mix(2, 1, ComplexMatrix(0.5 * a.choi() + 0.5 * b.choi()));
  CHECK(is_cp(mix).cp);

  CHECK_FALSE(is_cp(transpose_channel(2)).cp);
}

TEST_CASE("is_tp detects the unbalanced measure-and-prepare map") {
  CHECK(is_tp(identity_channel(2)).pass);
  CHECK(is_tp(pinching_channel(2)).pass);

  Rng rng(308);
  const Channel bad = trace_two_member(random_density_matrix(2, rng));
  const DeviationCheck tp = is_tp(bad);
  CHECK_FALSE(tp.pass);
  CHECK(std::abs(tp.max_deviation - 0.5) < 1e-12);

  // The R marginal of its choi is diag(1, 0), not I/2.
  const ComplexMatrix marginal =
      partial_trace(bad.choi(), TensorSpace::homogeneous(2, 2), {0});
  ComplexMatrix expected = ComplexMatrix::Zero(2, 2);
  expected(0, 0) = 1.0;
  CHECK(max_abs_diff(marginal, expected) < 1e-14);

  CHECK(is_cp(bad).cp);
  CHECK(std::abs(bad.choi().trace().real() - 1.0) < 1e-14);
}

TEST_CASE("unit output trace for trace-preserving channels") {
  Rng rng(309);
  const Channel c = random_cptp(3, 4, rng.raw());
  for (int trial = 0; trial < 50; ++trial) {
    const DensityOperator rho = random_density(TensorSpace({3}), rng);
    CHECK(std::abs(apply(c, rho).trace().real() - 1.0) <= 1e-10);
  }
}

TEST_CASE("permute_channel moves copies") {
  Rng rng(310);
  const Channel a = random_cptp(2, 2, rng.raw());
  const Channel b = random_cptp(2, 1, rng.raw());
  const Channel ab = pair_channel(a, b);

  CHECK(max_abs_diff(permute_channel(ab, Permutation::identity(2)).choi(),
                     ab.choi()) == 0.0);

  const Channel swapped =
      permute_channel(ab, Permutation::transposition(2, 0, 1));
  CHECK(max_abs_diff(swapped.choi(), pair_channel(b, a).choi()) == 0.0);

  // Rotating three equal factors reassociates the entry products, so the
  // match is only up to rounding.
  const Channel power = tensor_power(a, 3);
  const Channel rotated = permute_channel(power, Permutation({1, 2, 0}));
  CHECK(max_abs_diff(rotated.choi(), power.choi()) < 1e-15);

  CHECK_THROWS_AS(permute_channel(ab, Permutation::identity(3)),
                  std::invalid_argument);
}

TEST_CASE("permute_channel respects composition") {
  Rng rng(311);
  const Channel power = tensor_power(random_cptp(2, 2, rng.raw()), 3);
  ComplexMatrix tweak = power.choi();
  // Break the symmetry so the composition test is not vacuous.
  const Channel c(2, 3,
                  ComplexMatrix(0.7 * tweak +
                                0.3 * kron(jamiolkowski(bit_flip_channel()).matrix(),
                                           kron(max_entangled(2).matrix(),
                                                max_entangled(2).matrix()))));
  for (int trial = 0; trial < 5; ++trial) {
    const Permutation p1 = testutil::random_permutation(3, rng);
    const Permutation p2 = testutil::random_permutation(3, rng);
    const Channel lhs = permute_channel(permute_channel(c, p2), p1);
    const Channel rhs = permute_channel(c, p1.compose(p2));
    CHECK(max_abs_diff(lhs.choi(), rhs.choi()) < 1e-12);
  }
}

TEST_CASE("is_symmetric_channel pinned cases") {
  Rng rng(312);
  const Channel power = tensor_power(random_cptp(2, 3, rng.raw()), 3);
  CHECK(is_symmetric_channel(power).pass);

  const Channel mixed_pair = pair_channel(identity_channel(2), bit_flip_channel());
  const DeviationCheck asym = is_symmetric_channel(mixed_pair);
  CHECK_FALSE(asym.pass);
  // The two product chois have disjoint supports with entries 1/4.
  CHECK(asym.max_deviation == 0.25);

  CHECK(is_symmetric_channel(swap_conjugation()).pass);
}

TEST_CASE("is_channel_extension on powers and mixtures") {
  Rng rng(313);
  const Channel c = random_cptp(2, 2, rng.raw());
  for (int k = 1; k <= 2; ++k) {
    const ChannelExtensionCheck ext =
        is_channel_extension(tensor_power(c, k), tensor_power(c, k + 1));
    CHECK(ext.pass);
    CHECK(ext.max_deviation <= 1e-10);
    CHECK(ext.choi_marginal_pass);
    CHECK(ext.choi_marginal_deviation <= 1e-10);
  }

  const Channel other = random_cptp(2, 4, rng.raw());
  const auto mix = [&](int k) {
    return Channel(2, k,
                   ComplexMatrix(0.4 * kron_power(c.choi(), k) +
                                 0.6 * kron_power(other.choi(), k)));
  };
  const ChannelExtensionCheck ext = is_channel_extension(mix(2), mix(3));
  CHECK(ext.pass);
  CHECK(ext.choi_marginal_pass);
}

TEST_CASE("SWAP conjugation extends no single-system channel") {
  const ChannelExtensionCheck ext =
      is_channel_extension(identity_channel(2), swap_conjugation());
  CHECK_FALSE(ext.pass);
  // On |01><01| the two sides differ by a full basis flip.
  CHECK(std::abs(ext.max_deviation - 1.0) < 1e-12);
  CHECK_FALSE(ext.choi_marginal_pass);
  CHECK(std::abs(ext.choi_marginal_deviation - 0.5) < 1e-12);

  CHECK_THROWS_AS(is_channel_extension(identity_channel(2), identity_channel(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      is_channel_extension(identity_channel(3), swap_conjugation()),
      std::invalid_argument);
}

TEST_CASE("random_cptp produces deterministic trace-preserving channels") {
  const Channel a = random_cptp(2, 3, 42);
  const Channel b = random_cptp(2, 3, 42);
  CHECK(max_abs_diff(a.choi(), b.choi()) == 0.0);

  const Channel other = random_cptp(2, 3, 43);
  CHECK(max_abs_diff(a.choi(), other.choi()) > 1e-3);

  for (int rank = 1; rank <= 4; ++rank) {
    const Channel c = random_cptp(2, rank, 100 + rank);
    CHECK(is_cp(c).cp);
    CHECK(is_tp(c).pass);
  }
  const Channel qutrit = random_cptp(3, 2, 7);
  CHECK(is_cp(qutrit).cp);
  CHECK(is_tp(qutrit).pass);

  // Rank one is a unitary conjugation: pure choi.
  const Channel unitary = random_cptp(2, 1, 9);
  CHECK(std::abs((unitary.choi() * unitary.choi()).trace().real() - 1.0) <
        1e-10);

  CHECK_THROWS_AS(random_cptp(2, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(random_cptp(2, 5, 1), std::invalid_argument);
}

TEST_CASE("SVector round trips are exact") {
  Rng rng(314);
  for (const Index d : {Index(2), Index(3)}) {
    const Channel c = random_cptp(d, 2, rng.raw());
    const SVector s = svector_from_phi(c);
    const Channel back = phi_from_svector(s);
    CHECK(max_abs_diff(back.choi(), c.choi()) == 0.0);
    CHECK(svector_from_phi(back) == s);
  }
  CHECK_THROWS_AS(svector_from_phi(tensor_power(identity_channel(2), 2)),
                  std::invalid_argument);
}

TEST_CASE("SVector pinned coefficient patterns") {
  // Identity channel: S_{l,j,m,k} = delta_{lj} delta_{mk}.
  const SVector id = svector_from_phi(identity_channel(2));
  for (Index l = 0; l < 2; ++l)
    for (Index j = 0; j < 2; ++j)
      for (Index m = 0; m < 2; ++m)
        for (Index k = 0; k < 2; ++k)
          CHECK(id.action_coefficient(l, j, m, k) ==
                Complex((l == j && m == k) ? 1.0 : 0.0));

  // S_{l,j,m,k} = delta_{lm} delta_{jk} / D reassembles to depolarizing.
  ComplexVector coeffs(16);
  for (Index l = 0; l < 2; ++l)
    for (Index j = 0; j < 2; ++j)
      for (Index m = 0; m < 2; ++m)
        for (Index k = 0; k < 2; ++k)
          coeffs(((l * 2 + j) * 2 + m) * 2 + k) =
              (l == m && j == k) ? 0.5 : 0.0;
  const Channel dep = phi_from_svector(SVector::from_action_coefficients(2, coeffs));
  CHECK(max_abs_diff(dep.choi(), depolarizing_channel(2).choi()) == 0.0);
}

TEST_CASE("phi_from_svector rejects vectors outside the admissible domain") {
  const SVector transpose_s = svector_from_phi(transpose_channel(2));
  CHECK_THROWS_AS(phi_from_svector(transpose_s), std::invalid_argument);

  ComplexVector wrong_size(8);
  wrong_size.setZero();
  CHECK_THROWS_AS(SVector::from_action_coefficients(2, wrong_size),
                  std::invalid_argument);
}

TEST_CASE("measure_prepare_channel validates and reproduces its action") {
  Rng rng(315);
  const ComplexMatrix sigma0 = random_density_matrix(2, rng);
  const ComplexMatrix sigma1 = random_density_matrix(2, rng);
  RealVector gains(2);
  gains << 0.5, 1.5;
  const Channel c = measure_prepare_channel(2, gains, {sigma0, sigma1});
  CHECK(is_cp(c).cp);
  CHECK_FALSE(is_tp(c).pass);
  const DensityOperator zero = DensityOperator::basis_state(2, 0);
  CHECK(std::abs(apply(c, zero).trace().real() - 0.5) < 1e-12);
  CHECK(max_abs_diff(apply(c, zero), ComplexMatrix(0.5 * sigma0)) < 1e-12);

  RealVector negative(2);
  negative << -1.0, 3.0;
  CHECK_THROWS_AS(measure_prepare_channel(2, negative, {sigma0, sigma1}),
                  std::invalid_argument);
  RealVector unbalanced(2);
  unbalanced << 1.0, 0.5;  // choi trace 0.75, rejected by the constructor
  CHECK_THROWS_AS(measure_prepare_channel(2, unbalanced, {sigma0, sigma1}),
                  std::invalid_argument);
}

TEST_CASE("channel_from_kraus matches conjugation sums") {
  Rng rng(316);
  const ComplexMatrix k0 = testutil::hadamard() / std::sqrt(2.0);
  const ComplexMatrix k1 = testutil::pauli_x() / std::sqrt(2.0);
  const Channel c = channel_from_kraus(2, 1, {k0, k1});
  CHECK(is_tp(c).pass);
  const DensityOperator rho = random_density(TensorSpace({2}), rng);
  const ComplexMatrix expected = k0 * rho.matrix() * k0.adjoint() +
                                 k1 * rho.matrix() * k1.adjoint();
  CHECK(max_abs_diff(apply(c, rho), expected) < 1e-13);
}
