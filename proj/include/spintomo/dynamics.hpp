#pragma once

#include <vector>

#include "spintomo/recon_mixed.hpp"

namespace spintomo {

// ---------------------------------------------------------------------------
// Hamiltonians.
// ---------------------------------------------------------------------------

struct Hamiltonian {
  SpinValue spin;
  CMatrix matrix;

  Hamiltonian(SpinValue spin, CMatrix m) : spin(spin), matrix(std::move(m)) {
    if (matrix.rows() != spin.dimension() || matrix.cols() != spin.dimension())
      throw DimensionMismatch("Hamiltonian: matrix dimension mismatch");
    if ((matrix - matrix.adjoint()).norm() > 1e-12)
      throw InvalidArgument("Hamiltonian: not hermitean");
  }

  // Linear Zeeman term omega * (n . S).
  static Hamiltonian zeeman(SpinValue spin, double omega, const Axis& axis) {
    SpinOperators ops = spin_operators(spin);
    return Hamiltonian(spin, omega * spin_along(ops, axis.unit()));
  }

  // omega * (n . S) + kappa * S_z^2.
  static Hamiltonian quadratic(SpinValue spin, double omega, const Axis& axis,
                               double kappa) {
    SpinOperators ops = spin_operators(spin);
    CMatrix m = omega * spin_along(ops, axis.unit()) + kappa * ops.sz * ops.sz;
    return Hamiltonian(spin, m);
  }
};

// Spectral propagator exp(-i H t), exact for any t.
class Propagator {
 public:
  explicit Propagator(const Hamiltonian& h) : spin_(h.spin) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix);
    vectors_ = es.eigenvectors();
    energies_ = es.eigenvalues();
  }

  CMatrix unitary(double t) const {
    CVector phases(energies_.size());
    for (int i = 0; i < energies_.size(); ++i)
      phases[i] = std::exp(Complex(0, -energies_[i] * t));
    return vectors_ * phases.asDiagonal() * vectors_.adjoint();
  }

  PureState evolve(const PureState& psi, double t) const {
    if (psi.spin != spin_) throw DimensionMismatch("evolve: spin mismatch");
    return PureState(spin_, unitary(t) * psi.amplitudes);
  }

  DensityMatrix evolve(const DensityMatrix& rho, double t) const {
    if (rho.spin != spin_) throw DimensionMismatch("evolve: spin mismatch");
    CMatrix u = unitary(t);
    return DensityMatrix(spin_, u * rho.matrix * u.adjoint());
  }

 private:
  SpinValue spin_;
  CMatrix vectors_;
  RVector energies_;
};

inline PureState evolve(const PureState& psi, const Hamiltonian& h, double t) {
  return Propagator(h).evolve(psi, t);
}

inline DensityMatrix evolve(const DensityMatrix& rho, const Hamiltonian& h,
                            double t) {
  return Propagator(h).evolve(rho, t);
}

// ---------------------------------------------------------------------------
// Trajectories in expectation-value space.
// ---------------------------------------------------------------------------

// Stacked quorum probabilities p_m^(k)(t) on a strictly increasing time grid.
struct QuorumTrajectory {
  SpinValue spin;
  QuorumSpec quorum;
  std::vector<double> times;
  std::vector<RVector> values;  // stacked axis-major, one entry per time
};

inline QuorumTrajectory quorum_trajectory(const DensityMatrix& state0,
                                          const Hamiltonian& h,
                                          const std::vector<double>& times,
                                          const QuorumSpec& quorum) {
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] <= times[i - 1])
      throw InvalidArgument("quorum_trajectory: times must be increasing");
  Propagator prop(h);
  QuorumTrajectory traj{state0.spin, quorum, times, {}};
  traj.values.reserve(times.size());
  for (double t : times) {
    DensityMatrix rho_t = prop.evolve(state0, t);
    traj.values.push_back(measure_exact(rho_t, quorum).stacked());
  }
  return traj;
}

inline QuorumTrajectory quorum_trajectory(const PureState& state0,
                                          const Hamiltonian& h,
                                          const std::vector<double>& times,
                                          const QuorumSpec& quorum) {
  return quorum_trajectory(state0.to_density(), h, times, quorum);
}

// ---------------------------------------------------------------------------
// Closure of the dynamics on expectation values.
// ---------------------------------------------------------------------------

struct ClosureReport {
  double max_deviation = 0.0;
  int steps = 0;
};

// Certifies that the quorum values at t_i determine those at t_{i+1}: each
// recorded point is reconstructed from the quorum values alone, propagated
// one step with the exact propagator, and compared against the next record.
inline ClosureReport closure_check(const QuorumTrajectory& traj,
                                   const Hamiltonian& h) {
  if (traj.times.size() < 2)
    throw InvalidArgument("closure_check: need at least two grid times");
  Propagator prop(h);
  int d = traj.spin.dimension();
  ClosureReport report;
  report.steps = int(traj.times.size()) - 1;
  for (std::size_t i = 0; i + 1 < traj.times.size(); ++i) {
    IntensityTable table(traj.spin);
    table.axes = traj.quorum.axes;
    table.probabilities.resize(traj.quorum.size(), d);
    for (int k = 0; k < traj.quorum.size(); ++k)
      table.probabilities.row(k) =
          traj.values[i].segment(k * d, d).transpose();
    ReconResult recon = reconstruct_mixed(table, traj.quorum);
    double dt = traj.times[i + 1] - traj.times[i];
    DensityMatrix next = prop.evolve(recon.rho_hat, dt);
    RVector predicted = measure_exact(next, traj.quorum).stacked();
    double dev = (predicted - traj.values[i + 1]).cwiseAbs().maxCoeff();
    report.max_deviation = std::max(report.max_deviation, dev);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Instantaneous generator probe.
// ---------------------------------------------------------------------------

struct GeneratorProbeReport {
  double max_gap = 0.0;  // max |finite-difference - commutator| over the quorum
};

// Rates d<O_q>/dt for the quorum projectors O_q = |m, n_k><m, n_k|,
// estimated by central finite differences of the trajectory and by the
// exact form Tr(rho i[H, O_q]).  The gap is O(dt^2).
inline GeneratorProbeReport generator_probe(const DensityMatrix& state,
                                            const Hamiltonian& h,
                                            const QuorumSpec& quorum,
                                            double dt) {
  if (dt <= 0) throw InvalidArgument("generator_probe: dt must be positive");
  Propagator prop(h);
  DensityMatrix fwd = prop.evolve(state, dt);
  DensityMatrix bwd = prop.evolve(state, -dt);
  GeneratorProbeReport report;
  int d = state.spin.dimension();
  for (int k = 0; k < quorum.size(); ++k) {
    RVector pf = sg_probabilities(fwd, quorum.axes[k]);
    RVector pb = sg_probabilities(bwd, quorum.axes[k]);
    CMatrix u = rotation_to_axis(state.spin, quorum.axes[k]);
    for (int m = 0; m < d; ++m) {
      double fd_rate = (pf[m] - pb[m]) / (2.0 * dt);
      CMatrix proj = u.col(m) * u.col(m).adjoint();
      CMatrix comm = h.matrix * proj - proj * h.matrix;
      double exact_rate =
          (state.matrix * Complex(0, 1) * comm).trace().real();
      report.max_gap = std::max(report.max_gap, std::abs(fd_rate - exact_rate));
    }
  }
  return report;
}

inline GeneratorProbeReport generator_probe(const PureState& state,
                                            const Hamiltonian& h,
                                            const QuorumSpec& quorum,
                                            double dt) {
  return generator_probe(state.to_density(), h, quorum, dt);
}

}  // namespace spintomo
