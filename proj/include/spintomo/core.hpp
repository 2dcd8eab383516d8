#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>

#include "spintomo/errors.hpp"

namespace spintomo {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Deterministic randomness.
//
// All stochastic operations draw from this generator so that runs are
// reproducible bit-for-bit across platforms; the standard distributions are
// implementation-defined, hence the hand-rolled uniform/normal.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed, e.g. per-axis sub-seeds from
// (seed, axis index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x1234567890abcdefULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // splitmix64-seeded xoshiro-style state folded into a simple 64-bit
    // generator; splitmix64 itself iterated is statistically fine here.
    state_ = splitmix64(seed ^ 0x5bf03635aad2c9c2ULL);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Complex complex_normal() { return Complex(normal(), normal()); }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Domain types.
// ---------------------------------------------------------------------------

// Spin quantum number s stored exactly as the integer 2s; s may be
// half-integer. Hilbert dimension d = 2s + 1.
class SpinValue {
 public:
  explicit SpinValue(int two_s) : two_s_(two_s) {
    if (two_s < 0) throw InvalidArgument("SpinValue: 2s must be >= 0");
  }
  int two_s() const { return two_s_; }
  int dimension() const { return two_s_ + 1; }
  double s() const { return 0.5 * two_s_; }
  // m value for basis index i, descending from m = s at i = 0.
  double m_of_index(int i) const { return 0.5 * (two_s_ - 2 * i); }
  bool operator==(const SpinValue& o) const { return two_s_ == o.two_s_; }
  bool operator!=(const SpinValue& o) const { return two_s_ != o.two_s_; }

 private:
  int two_s_;
};

// Unit direction in 3-space, stored as polar/azimuthal angles.
struct Axis {
  double theta = 0.0;  // polar angle in [0, pi]
  double phi = 0.0;    // azimuth in [0, 2*pi)

  Axis() = default;
  Axis(double theta, double phi) : theta(theta), phi(phi) {}

  Eigen::Vector3d unit() const {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
            std::cos(theta)};
  }

  static Axis from_unit_vector(const Eigen::Vector3d& n) {
    double norm = n.norm();
    if (std::abs(norm - 1.0) > 1e-9)
      throw InvalidArgument("Axis: vector is not unit length, |n| = " +
                            std::to_string(norm));
    Eigen::Vector3d u = n / norm;
    double theta = std::acos(std::clamp(u.z(), -1.0, 1.0));
    double phi = std::atan2(u.y(), u.x());
    if (phi < 0) phi += 2.0 * kPi;
    return Axis(theta, phi);
  }

  static Axis x() { return Axis(kPi / 2, 0.0); }
  static Axis y() { return Axis(kPi / 2, kPi / 2); }
  static Axis z() { return Axis(0.0, 0.0); }

  // Angular distance to another axis.  atan2 form: exact for identical
  // vectors and accurate near 0 and pi, where acos loses half the digits.
  double angle_to(const Axis& o) const {
    Eigen::Vector3d a = unit(), b = o.unit();
    return std::atan2(a.cross(b).norm(), a.dot(b));
  }
};

struct PureState;

// Hermitean, trace-one, positive-semidefinite state.
struct DensityMatrix {
  SpinValue spin;
  CMatrix matrix;

  DensityMatrix(SpinValue spin, CMatrix m) : spin(spin), matrix(std::move(m)) {
    if (matrix.rows() != spin.dimension() || matrix.cols() != spin.dimension())
      throw DimensionMismatch("DensityMatrix: matrix dimension mismatch");
  }

  // Checks the state invariants; tolerances per the data contracts.
  void validate() const {
    if ((matrix - matrix.adjoint()).norm() > 1e-12)
      throw InvalidArgument("DensityMatrix: not hermitean");
    if (std::abs(matrix.trace().real() - 1.0) > 1e-12 ||
        std::abs(matrix.trace().imag()) > 1e-12)
      throw InvalidArgument("DensityMatrix: trace != 1");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(matrix, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw InvalidArgument("DensityMatrix: negative eigenvalue " +
                            std::to_string(es.eigenvalues().minCoeff()));
  }

  double purity() const { return (matrix * matrix).trace().real(); }
};

// Normalized state vector in the S_z eigenbasis, index 0 <-> m = s.
struct PureState {
  SpinValue spin;
  CVector amplitudes;

  PureState(SpinValue spin, CVector a) : spin(spin), amplitudes(std::move(a)) {
    if (amplitudes.size() != spin.dimension())
      throw DimensionMismatch("PureState: amplitude count mismatch");
  }

  // Gauge-normal form: first nonzero amplitude real and strictly positive.
  PureState gauge_normal() const {
    CVector a = amplitudes;
    for (int i = 0; i < a.size(); ++i) {
      if (std::abs(a[i]) > 1e-14) {
        a *= std::conj(a[i]) / std::abs(a[i]);
        break;
      }
    }
    return PureState(spin, a);
  }

  DensityMatrix to_density() const {
    return DensityMatrix(spin, amplitudes * amplitudes.adjoint());
  }

  double fidelity(const PureState& other) const {
    if (spin != other.spin) throw DimensionMismatch("fidelity: spin mismatch");
    return std::norm(amplitudes.dot(other.amplitudes));
  }
};

// sx, sy, sz in units of hbar (= 1), sz diagonal with entries s .. -s.
struct SpinOperators {
  SpinValue spin;
  CMatrix sx, sy, sz;
};

// Arbitrary (not necessarily hermitean) operator on the spin-s space.
struct GenericOperator {
  SpinValue spin;
  CMatrix matrix;

  GenericOperator(SpinValue spin, CMatrix m)
      : spin(spin), matrix(std::move(m)) {
    if (matrix.rows() != spin.dimension() || matrix.cols() != spin.dimension())
      throw DimensionMismatch("GenericOperator: matrix dimension mismatch");
  }
};

// ---------------------------------------------------------------------------
// Operations.
// ---------------------------------------------------------------------------

// Standard ladder construction: (sx +/- i sy) have matrix elements
// sqrt(s(s+1) - m(m+1)).
inline SpinOperators spin_operators(SpinValue spin) {
  int d = spin.dimension();
  double s = spin.s();
  CMatrix sp = CMatrix::Zero(d, d);  // raising operator
  CMatrix sz = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    double m = spin.m_of_index(i);
    sz(i, i) = m;
    if (i >= 1) sp(i - 1, i) = std::sqrt(s * (s + 1) - m * (m + 1));
  }
  CMatrix sm = sp.adjoint();
  SpinOperators ops{spin, CMatrix(), CMatrix(), CMatrix()};
  ops.sx = 0.5 * (sp + sm);
  ops.sy = Complex(0, -0.5) * (sp - sm);
  ops.sz = sz;
  return ops;
}

// n . S for a unit vector n.
inline CMatrix spin_along(const SpinOperators& ops, const Eigen::Vector3d& n) {
  return n.x() * ops.sx + n.y() * ops.sy + n.z() * ops.sz;
}

// exp(-i angle u . S) via spectral decomposition of the hermitean generator.
inline CMatrix rotation_from_axis_angle(SpinValue spin,
                                        const Eigen::Vector3d& u,
                                        double angle) {
  if (std::abs(u.norm() - 1.0) > 1e-9)
    throw InvalidArgument("rotation_from_axis_angle: non-unit rotation axis");
  SpinOperators ops = spin_operators(spin);
  CMatrix g = spin_along(ops, u);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(g);
  CVector phases(spin.dimension());
  for (int i = 0; i < spin.dimension(); ++i)
    phases[i] = std::exp(Complex(0, -angle * es.eigenvalues()[i]));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// U = exp(-i theta m_hat . S), m_hat = (-sin phi, cos phi, 0): maps the S_z
// eigenbasis to the S.n eigenbasis, column j the eigenvector for m(j).
// theta = 0 gives U = I exactly.
inline CMatrix rotation_to_axis(SpinValue spin, const Axis& axis) {
  int d = spin.dimension();
  if (axis.theta == 0.0) return CMatrix::Identity(d, d);
  Eigen::Vector3d m_hat(-std::sin(axis.phi), std::cos(axis.phi), 0.0);
  return rotation_from_axis_angle(spin, m_hat, axis.theta);
}

// Tr(rho O).
inline Complex expectation(const DensityMatrix& rho, const GenericOperator& op) {
  if (rho.spin != op.spin)
    throw DimensionMismatch("expectation: dimension mismatch");
  return (rho.matrix * op.matrix).trace();
}

inline Complex expectation(const DensityMatrix& rho, const CMatrix& op) {
  return expectation(rho, GenericOperator(rho.spin, op));
}

// Haar-style random pure state: complex normal vector, normalized.
inline PureState random_pure(SpinValue spin, std::uint64_t seed) {
  Rng rng(seed);
  CVector a(spin.dimension());
  for (int i = 0; i < a.size(); ++i) a[i] = rng.complex_normal();
  a /= a.norm();
  return PureState(spin, a);
}

// Random density matrix of the requested rank: normalized A A^dagger with
// A a d x rank complex normal matrix.
inline DensityMatrix random_density(SpinValue spin, std::uint64_t seed,
                                    int rank) {
  int d = spin.dimension();
  if (rank < 1 || rank > d)
    throw InvalidArgument("random_density: rank must be in [1, 2s+1]");
  Rng rng(seed);
  CMatrix a(d, rank);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < rank; ++j) a(i, j) = rng.complex_normal();
  CMatrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(spin, rho);
}

}  // namespace spintomo
