#include <doctest.h>

#include "spintomo/core.hpp"

using namespace spintomo;

namespace {

CMatrix commutator(const CMatrix& a, const CMatrix& b) {
  return a * b - b * a;
}

}  // namespace

TEST_CASE("spin operators: defining eigenvalues of s_z") {
  SpinOperators half = spin_operators(SpinValue(1));
  CHECK(half.sz(0, 0).real() == doctest::Approx(0.5));
  CHECK(half.sz(1, 1).real() == doctest::Approx(-0.5));

  SpinOperators one = spin_operators(SpinValue(2));
  CHECK(one.sz(0, 0).real() == doctest::Approx(1.0));
  CHECK(one.sz(1, 1).real() == doctest::Approx(0.0));
  CHECK(one.sz(2, 2).real() == doctest::Approx(-1.0));
}

TEST_CASE("spin operators: ladder matrix elements") {
  SpinValue spin(3);  // s = 3/2
  SpinOperators ops = spin_operators(spin);
  CMatrix sp = ops.sx + Complex(0, 1) * ops.sy;
  double s = spin.s();
  for (int i = 1; i < spin.dimension(); ++i) {
    double m = spin.m_of_index(i);
    CHECK(sp(i - 1, i).real() ==
          doctest::Approx(std::sqrt(s * (s + 1) - m * (m + 1))));
  }
}

TEST_CASE("spin operators: commutation relations for 2s = 1 .. 12") {
  for (int two_s = 1; two_s <= 12; ++two_s) {
    SpinOperators ops = spin_operators(SpinValue(two_s));
    Complex i(0, 1);
    CHECK((commutator(ops.sx, ops.sy) - i * ops.sz).norm() <= 1e-12);
    CHECK((commutator(ops.sy, ops.sz) - i * ops.sx).norm() <= 1e-12);
    CHECK((commutator(ops.sz, ops.sx) - i * ops.sy).norm() <= 1e-12);
    CHECK((ops.sx - ops.sx.adjoint()).norm() <= 1e-12);
  }
  SpinOperators tight = spin_operators(SpinValue(1));
  CHECK((commutator(tight.sx, tight.sy) - Complex(0, 1) * tight.sz).norm() <=
        1e-14);
}

TEST_CASE("rotation to +z is the identity, exactly") {
  CMatrix u = rotation_to_axis(SpinValue(4), Axis::z());
  CHECK((u - CMatrix::Identity(5, 5)).norm() == 0.0);
}

TEST_CASE("rotation: equatorial symmetry for s = 1/2") {
  SpinValue spin(1);
  CVector up(2);
  up << 1, 0;
  CMatrix u = rotation_to_axis(spin, Axis::x());
  // probability of +1/2 along x for |up z>
  double p = std::norm((u.adjoint() * up)(0));
  CHECK(p == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("rotation columns are eigenvectors of n.S (dense eigensolver oracle)") {
  SpinValue spin(2);
  Axis axis(kPi / 3, 0.7);
  CMatrix u = rotation_to_axis(spin, axis);
  CMatrix ns = spin_along(spin_operators(spin), axis.unit());
  for (int j = 0; j < spin.dimension(); ++j) {
    double m = spin.m_of_index(j);
    CHECK((ns * u.col(j) - m * u.col(j)).norm() <= 1e-12);
  }
}

TEST_CASE("generated unitaries are unitary") {
  for (int two_s : {1, 2, 5, 9}) {
    SpinValue spin(two_s);
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
      Axis axis(rng.uniform() * kPi, rng.uniform() * 2 * kPi);
      CMatrix u = rotation_to_axis(spin, axis);
      int d = spin.dimension();
      CHECK((u.adjoint() * u - CMatrix::Identity(d, d)).norm() <= 1e-12);
    }
  }
}

TEST_CASE("expectation: traceless operator on the maximally mixed state") {
  SpinValue spin(2);
  int d = spin.dimension();
  DensityMatrix rho(spin, CMatrix::Identity(d, d) / double(d));
  SpinOperators ops = spin_operators(spin);
  CHECK(std::abs(expectation(rho, ops.sz)) <= 1e-14);
}

TEST_CASE("expectation: eigenstate of s_z") {
  SpinValue spin(1);
  CVector up(2);
  up << 1, 0;
  DensityMatrix rho = PureState(spin, up).to_density();
  SpinOperators ops = spin_operators(spin);
  CHECK(expectation(rho, ops.sz).real() == doctest::Approx(0.5));
  CHECK(std::abs(expectation(rho, ops.sz).imag()) <= 1e-12);
}

TEST_CASE("expectation matches the spectral oracle for s_x^2, s = 1") {
  SpinValue spin(2);
  DensityMatrix rho = random_density(spin, 5150, spin.dimension());
  SpinOperators ops = spin_operators(spin);
  CMatrix sx2 = ops.sx * ops.sx;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(ops.sx);
  double oracle = 0.0;
  for (int i = 0; i < spin.dimension(); ++i) {
    double lambda = es.eigenvalues()[i];
    CVector v = es.eigenvectors().col(i);
    oracle += lambda * lambda * (v.adjoint() * rho.matrix * v)(0).real();
  }
  CHECK(expectation(rho, sx2).real() == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("expectation is linear in both arguments") {
  SpinValue spin(3);
  int d = spin.dimension();
  for (int trial = 0; trial < 5; ++trial) {
    DensityMatrix r1 = random_density(spin, 100 + trial, d);
    DensityMatrix r2 = random_density(spin, 200 + trial, d);
    Rng rng(300 + trial);
    CMatrix o1(d, d), o2(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        o1(i, j) = rng.complex_normal();
        o2(i, j) = rng.complex_normal();
      }
    double a = 0.3, b = 0.7;
    DensityMatrix mix(spin, a * r1.matrix + b * r2.matrix);
    Complex lhs = expectation(mix, GenericOperator(spin, o1));
    Complex rhs = a * expectation(r1, GenericOperator(spin, o1)) +
                  b * expectation(r2, GenericOperator(spin, o1));
    CHECK(std::abs(lhs - rhs) <= 1e-12);
    Complex sum_op = 0;
    Complex lhs2 =
        expectation(r1, GenericOperator(spin, CMatrix(o1 + o2)));
    Complex rhs2 = expectation(r1, GenericOperator(spin, o1)) +
                   expectation(r1, GenericOperator(spin, o2));
    CHECK(std::abs(lhs2 - rhs2) <= 1e-12);
    (void)sum_op;
  }
}

TEST_CASE("pure-state embedding preserves expectations") {
  SpinValue spin(4);
  int d = spin.dimension();
  PureState psi = random_pure(spin, 11);
  DensityMatrix rho = psi.to_density();
  Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    CMatrix o(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) o(i, j) = rng.complex_normal();
    Complex direct = psi.amplitudes.dot(o * psi.amplitudes);
    CHECK(std::abs(expectation(rho, GenericOperator(spin, o)) - direct) <=
          1e-12);
  }
}

TEST_CASE("random states: rank-1 density is a projector") {
  DensityMatrix rho = random_density(SpinValue(3), 99, 1);
  CHECK(rho.purity() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("random states: full-rank density has a full spectrum") {
  SpinValue spin(3);
  DensityMatrix rho = random_density(spin, 42, spin.dimension());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.matrix, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() > 1e-6);
}

TEST_CASE("random states: determinism per seed") {
  SpinValue spin(5);
  PureState a = random_pure(spin, 7);
  PureState b = random_pure(spin, 7);
  CHECK((a.amplitudes - b.amplitudes).norm() == 0.0);
  DensityMatrix r1 = random_density(spin, 7, 3);
  DensityMatrix r2 = random_density(spin, 7, 3);
  CHECK((r1.matrix - r2.matrix).norm() == 0.0);
}

TEST_CASE("random density rejects invalid rank") {
  CHECK_THROWS_AS(random_density(SpinValue(2), 1, 0), InvalidArgument);
  CHECK_THROWS_AS(random_density(SpinValue(2), 1, 4), InvalidArgument);
}

TEST_CASE("gauge-normal form: first nonzero amplitude real positive") {
  SpinValue spin(2);
  CVector a(3);
  a << Complex(0.3, -0.4), Complex(0.5, 0.2), Complex(-0.1, 0.67);
  a /= a.norm();
  PureState psi = PureState(spin, a).gauge_normal();
  CHECK(psi.amplitudes[0].imag() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(psi.amplitudes[0].real() > 0);
  CHECK(psi.fidelity(PureState(spin, a)) == doctest::Approx(1.0));
}

TEST_CASE("axis from non-unit vector is rejected") {
  CHECK_THROWS_AS(Axis::from_unit_vector({1.0, 1.0, 1.0}), InvalidArgument);
}
