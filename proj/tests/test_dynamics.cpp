#include <doctest.h>

#include "spintomo/dynamics.hpp"

using namespace spintomo;

TEST_CASE("propagator: t = 0 is the identity and composition holds") {
  SpinValue spin(3);
  Hamiltonian h = Hamiltonian::quadratic(spin, 1.3, Axis(0.4, 1.1), 0.7);
  Propagator prop(h);
  int d = spin.dimension();
  CHECK((prop.unitary(0.0) - CMatrix::Identity(d, d)).norm() <= 1e-13);
  CHECK((prop.unitary(0.8) * prop.unitary(0.5) - prop.unitary(1.3)).norm() <=
        1e-12);
  CMatrix u = prop.unitary(2.1);
  CHECK((u.adjoint() * u - CMatrix::Identity(d, d)).norm() <= 1e-12);
}

TEST_CASE("energy eigenstates are stationary") {
  SpinValue spin(2);
  Hamiltonian h = Hamiltonian::zeeman(spin, 2.0, Axis(0.9, 0.3));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix);
  PureState eig(spin, es.eigenvectors().col(1));
  PureState evolved = evolve(eig, h, 3.7);
  CHECK(evolved.fidelity(eig) >= 1.0 - 1e-12);
}

TEST_CASE("Larmor precession: half turn flips the x eigenstate, s = 1/2") {
  SpinValue spin(1);
  double omega = 1.7;
  Hamiltonian h = Hamiltonian::zeeman(spin, omega, Axis::z());
  CMatrix ux = rotation_to_axis(spin, Axis::x());
  PureState up_x(spin, CVector(ux.col(0)));
  PureState down_x(spin, CVector(ux.col(1)));
  PureState evolved = evolve(up_x, h, kPi / omega);
  CHECK(evolved.fidelity(down_x) >= 1.0 - 1e-12);
  CHECK(evolved.fidelity(up_x) <= 1e-12);
}

TEST_CASE("closed-form Larmor intensity along x, s = 1/2") {
  SpinValue spin(1);
  double omega = 0.9;
  Hamiltonian h = Hamiltonian::zeeman(spin, omega, Axis::z());
  DensityMatrix rho0 = random_density(spin, 201, 2);
  SpinOperators ops = spin_operators(spin);
  double sx0 = expectation(rho0, ops.sx).real();
  double sy0 = expectation(rho0, ops.sy).real();
  for (double t : {0.0, 0.3, 1.1, 2.9, 6.0}) {
    RVector p = sg_probabilities(evolve(rho0, h, t), Axis::x());
    double closed_form =
        0.5 + sx0 * std::cos(omega * t) - sy0 * std::sin(omega * t);
    CHECK(p[0] == doctest::Approx(closed_form).epsilon(1e-10));
  }
}

TEST_CASE("evolution conserves energy and purity") {
  SpinValue spin(4);
  Hamiltonian h = Hamiltonian::quadratic(spin, 1.1, Axis(0.5, 2.0), 0.4);
  DensityMatrix rho0 = random_density(spin, 301, 3);
  GenericOperator h_op(spin, h.matrix);
  double e0 = expectation(rho0, h_op).real();
  double purity0 = rho0.purity();
  for (double t : {0.7, 3.3, 11.0}) {
    DensityMatrix rho_t = evolve(rho0, h, t);
    CHECK(std::abs(expectation(rho_t, h_op).real() - e0) <= 1e-12);
    CHECK(std::abs(rho_t.purity() - purity0) <= 1e-12);
  }
}

TEST_CASE("z-axis record is constant when H = omega s_z") {
  SpinValue spin(2);
  Hamiltonian h = Hamiltonian::zeeman(spin, 2.3, Axis::z());
  DensityMatrix rho0 = random_density(spin, 401, 3);
  std::vector<double> times;
  for (int i = 0; i <= 40; ++i) times.push_back(0.1 * i);
  QuorumTrajectory traj =
      quorum_trajectory(rho0, h, times, explicit_quorum({Axis::z()}));
  for (const RVector& p : traj.values)
    CHECK((p - traj.values.front()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("maximally mixed state is a fixed point of the trajectory") {
  SpinValue spin(2);
  int d = spin.dimension();
  DensityMatrix rho(spin, CMatrix::Identity(d, d) / double(d));
  Hamiltonian h = Hamiltonian::quadratic(spin, 1.0, Axis(1.0, 0.2), 0.5);
  QuorumTrajectory traj = quorum_trajectory(
      rho, h, {0.0, 0.5, 1.0}, cone_axes(spin, 4, 1.0));
  for (const RVector& p : traj.values)
    CHECK((p.array() - 1.0 / d).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("trajectory rejects non-increasing time grids") {
  SpinValue spin(1);
  DensityMatrix rho = random_density(spin, 1, 2);
  Hamiltonian h = Hamiltonian::zeeman(spin, 1.0, Axis::z());
  CHECK_THROWS_AS(
      quorum_trajectory(rho, h, {0.0, 0.5, 0.5}, cone_axes(spin, 3, 1.0)),
      InvalidArgument);
}

TEST_CASE("closure: quorum values at t determine the values at t + dt") {
  SpinValue spin(2);
  DensityMatrix rho0 = random_density(spin, 501, 3);
  Hamiltonian h = Hamiltonian::quadratic(spin, 1.2, Axis(0.8, 1.9), 0.3);
  DesignResult design = design_axes(spin, 5, DesignStrategy::ConeScan);
  std::vector<double> times;
  for (int i = 0; i <= 100; ++i) times.push_back(0.05 * i);
  QuorumTrajectory traj = quorum_trajectory(rho0, h, times, design.quorum);
  ClosureReport report = closure_check(traj, h);
  CHECK(report.steps == 100);
  CHECK(report.max_deviation <= 1e-8);
}

TEST_CASE("closure on a deficient quorum raises NotInjective") {
  SpinValue spin(1);
  DensityMatrix rho0 = random_density(spin, 601, 2);
  Hamiltonian h = Hamiltonian::zeeman(spin, 1.0, Axis(0.4, 0.0));
  QuorumTrajectory traj =
      quorum_trajectory(rho0, h, {0.0, 0.5}, cone_axes(spin, 2, 1.0));
  CHECK_THROWS_AS(closure_check(traj, h), NotInjective);
}

TEST_CASE("generator probe: finite differences match the commutator form") {
  SpinValue spin(2);
  DensityMatrix rho = random_density(spin, 701, 3);
  Hamiltonian h = Hamiltonian::quadratic(spin, 1.4, Axis(0.7, 2.5), 0.6);
  QuorumSpec quorum = cone_axes(spin, 4, 1.0);
  GeneratorProbeReport report = generator_probe(rho, h, quorum, 1e-4);
  CHECK(report.max_gap <= 1e-6);
}

TEST_CASE("generator probe gap shrinks as dt^2 (Richardson ratio near 4)") {
  SpinValue spin(2);
  DensityMatrix rho = random_density(spin, 801, 3);
  Hamiltonian h = Hamiltonian::quadratic(spin, 1.1, Axis(1.0, 0.4), 0.8);
  QuorumSpec quorum = cone_axes(spin, 4, 1.0);
  double g1 = generator_probe(rho, h, quorum, 2e-3).max_gap;
  double g2 = generator_probe(rho, h, quorum, 1e-3).max_gap;
  double ratio = g1 / g2;
  CHECK(ratio >= 3.0);
  CHECK(ratio <= 5.0);
}

TEST_CASE("generator probe rejects non-positive dt") {
  SpinValue spin(1);
  DensityMatrix rho = random_density(spin, 901, 2);
  Hamiltonian h = Hamiltonian::zeeman(spin, 1.0, Axis::z());
  CHECK_THROWS_AS(generator_probe(rho, h, cone_axes(spin, 3, 1.0), 0.0),
                  InvalidArgument);
}

TEST_CASE("Hamiltonian constructor rejects non-hermitean matrices") {
  SpinValue spin(1);
  CMatrix m(2, 2);
  m << Complex(0, 0), Complex(1, 0), Complex(0, 0), Complex(0, 0);
  CHECK_THROWS_AS(Hamiltonian(spin, m), InvalidArgument);
}
