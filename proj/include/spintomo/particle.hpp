#pragma once

#include <vector>

#include "spintomo/core.hpp"

namespace spintomo {

// ---------------------------------------------------------------------------
// Grid wavefunctions on a uniform symmetric x-grid.
// ---------------------------------------------------------------------------

// x_j = -L + j * dx, j = 0 .. N-1, dx = 2L/N; hbar = 1.  Normalized so
// sum |psi|^2 dx = 1.
struct GridWavefunction {
  int n = 0;
  double half_width = 0.0;  // L, domain [-L, L)
  double dx = 0.0;
  CVector values;

  double x_of(int j) const { return -half_width + j * dx; }

  double norm_squared() const { return values.squaredNorm() * dx; }

  GridWavefunction conjugate() const {
    GridWavefunction out = *this;
    out.values = values.conjugate();
    return out;
  }
};

inline GridWavefunction make_grid(int n, double half_width) {
  if (n < 2 || n % 2 != 0)
    throw InvalidArgument("grid: N must be even and >= 2");
  if (half_width <= 0) throw InvalidArgument("grid: L must be positive");
  GridWavefunction g;
  g.n = n;
  g.half_width = half_width;
  g.dx = 2.0 * half_width / n;
  g.values = CVector::Zero(n);
  return g;
}

// The odd-parity counterexample psi(x) = C (x + i x^3) e^{-x^2/2}: its
// complex conjugate shares both the position and momentum distributions yet
// is a distinct ray.
inline GridWavefunction make_counterexample(int n, double half_width) {
  GridWavefunction g = make_grid(n, half_width);
  for (int j = 0; j < n; ++j) {
    double x = g.x_of(j);
    double env = std::exp(-0.5 * x * x);
    g.values[j] = Complex(x * env, x * x * x * env);
  }
  g.values /= std::sqrt(g.norm_squared());
  return g;
}

// Unitary centered DFT: psi(p_k) = (dx / sqrt(2 pi)) sum_j psi(x_j)
// e^{-i p_k x_j}, p_k = 2 pi k / (N dx) with k = -N/2 .. N/2 - 1.
struct MomentumDensity {
  std::vector<double> p;
  std::vector<double> density;
  double dp = 0.0;
};

inline CVector momentum_amplitudes(const GridWavefunction& psi) {
  int n = psi.n;
  double dp = 2.0 * kPi / (n * psi.dx);
  CVector out(n);
  for (int k = 0; k < n; ++k) {
    double p = (k - n / 2) * dp;
    Complex acc = 0;
    for (int j = 0; j < n; ++j)
      acc += psi.values[j] * std::exp(Complex(0, -p * psi.x_of(j)));
    out[k] = acc * psi.dx / std::sqrt(2.0 * kPi);
  }
  return out;
}

inline MomentumDensity momentum_density(const GridWavefunction& psi) {
  CVector amps = momentum_amplitudes(psi);
  MomentumDensity md;
  md.dp = 2.0 * kPi / (psi.n * psi.dx);
  for (int k = 0; k < psi.n; ++k) {
    md.p.push_back((k - psi.n / 2) * md.dp);
    md.density.push_back(std::norm(amps[k]));
  }
  return md;
}

// Odd parity on the grid: psi(x_j) + psi(-x_j) = 0 for the paired points,
// and the unpaired endpoint x = -L must carry no amplitude.
inline double parity_defect(const GridWavefunction& psi) {
  double worst = std::abs(psi.values[0]);
  for (int j = 1; j < psi.n; ++j) {
    double v = std::abs(psi.values[j] + psi.values[psi.n - j]);
    worst = std::max(worst, v);
  }
  return worst;
}

// Gram determinant of the normalized real and imaginary parts; nonzero
// means psi_r and psi_i are linearly independent.
inline double real_imag_gram_determinant(const GridWavefunction& psi) {
  RVector re = psi.values.real();
  RVector im = psi.values.imag();
  double nr = re.norm(), ni = im.norm();
  if (nr < 1e-300 || ni < 1e-300) return 0.0;
  re /= nr;
  im /= ni;
  double cross = re.dot(im);
  return 1.0 - cross * cross;
}

struct PauliPartnerReport {
  double parity_defect = 0.0;
  double max_position_density_diff = 0.0;
  double max_momentum_density_diff = 0.0;
  double gram_determinant = 0.0;
  // |<psi*|psi>|; modulus 1 means the conjugate is the same ray (real psi,
  // degenerate case).
  double conjugate_overlap = 0.0;
  bool degenerate = false;
};

// Forms psi~ = psi* and verifies that it shares the position and momentum
// distributions of an odd-parity psi while being a distinct state.
inline PauliPartnerReport pauli_partner_check(const GridWavefunction& psi) {
  PauliPartnerReport report;
  report.parity_defect = parity_defect(psi);
  if (report.parity_defect > 1e-10)
    throw NotOddParity("pauli_partner_check: state is not odd, defect " +
                       std::to_string(report.parity_defect));
  GridWavefunction tilde = psi.conjugate();

  for (int j = 0; j < psi.n; ++j) {
    double diff = std::abs(std::norm(tilde.values[j]) - std::norm(psi.values[j]));
    report.max_position_density_diff =
        std::max(report.max_position_density_diff, diff);
  }

  MomentumDensity mp = momentum_density(psi);
  MomentumDensity mt = momentum_density(tilde);
  for (int k = 0; k < psi.n; ++k)
    report.max_momentum_density_diff = std::max(
        report.max_momentum_density_diff, std::abs(mp.density[k] - mt.density[k]));

  report.gram_determinant = real_imag_gram_determinant(psi);
  Complex overlap = (psi.values.conjugate().cwiseProduct(tilde.values)).sum() *
                    psi.dx;
  report.conjugate_overlap = std::abs(overlap);
  report.degenerate = report.conjugate_overlap > 1.0 - 1e-10;
  return report;
}

// Parseval check value: sum |psi(p)|^2 dp - sum |psi(x)|^2 dx.
inline double parseval_defect(const GridWavefunction& psi) {
  MomentumDensity md = momentum_density(psi);
  double pnorm = 0;
  for (double v : md.density) pnorm += v;
  pnorm *= md.dp;
  return pnorm - psi.norm_squared();
}

// ---------------------------------------------------------------------------
// Coherent-state positive example.
// ---------------------------------------------------------------------------

// alpha = sqrt(m omega / 2 hbar) <x> + i <p> / sqrt(2 m omega hbar): the
// two first moments already determine the coherent state completely.
inline Complex coherent_alpha(double mean_x, double mean_p, double mass,
                              double omega, double hbar) {
  if (mass <= 0 || omega <= 0 || hbar <= 0)
    throw InvalidArgument("coherent_alpha: m, omega, hbar must be positive");
  return Complex(std::sqrt(mass * omega / (2.0 * hbar)) * mean_x,
                 mean_p / std::sqrt(2.0 * mass * omega * hbar));
}

}  // namespace spintomo
