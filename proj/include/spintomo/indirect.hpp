#pragma once

#include <sstream>
#include <vector>

#include "spintomo/recon_mixed.hpp"
#include "spintomo/recon_pure.hpp"

namespace spintomo {

// ---------------------------------------------------------------------------
// Indirect expectation values: reconstruct the state from quorum data, then
// evaluate Tr(rho O) for any operator, hermitean or not.
// ---------------------------------------------------------------------------

struct IndirectResult {
  Complex value;
  ReconResult rho_source;
  QuorumSpec quorum;
};

inline IndirectResult indirect_expectation(const IntensityTable& table,
                                           const QuorumSpec& quorum,
                                           const GenericOperator& op,
                                           const ReconOptions& opts = {}) {
  if (op.spin != table.spin)
    throw DimensionMismatch("indirect_expectation: operator spin mismatch");
  ReconResult recon = reconstruct_mixed(table, quorum, opts);
  Complex value = expectation(recon.rho_hat, op);
  return IndirectResult{value, std::move(recon), quorum};
}

// A fixed catalogue of operators exercising the universal-device claim:
// powers of spin components along seeded random axes, the ladder operators,
// and random hermitean and non-hermitean matrices.
inline std::vector<GenericOperator> operator_battery(SpinValue spin,
                                                     std::uint64_t seed,
                                                     int count = 20) {
  SpinOperators ops = spin_operators(spin);
  int d = spin.dimension();
  std::vector<GenericOperator> battery;
  battery.emplace_back(spin, CMatrix::Identity(d, d));
  battery.emplace_back(spin, ops.sz);
  battery.emplace_back(spin, CMatrix(ops.sx + Complex(0, 1) * ops.sy));  // s_+
  battery.emplace_back(spin, CMatrix(ops.sx - Complex(0, 1) * ops.sy));  // s_-
  int idx = 0;
  while (int(battery.size()) < count) {
    Rng rng(derive_seed(seed, std::uint64_t(idx)));
    switch (idx % 3) {
      case 0: {  // multipole s_n^k along a random axis
        double z = 2.0 * rng.uniform() - 1.0;
        Axis n(std::acos(z), 2.0 * kPi * rng.uniform());
        int power = 1 + idx % spin.dimension();
        CMatrix base = spin_along(ops, n.unit());
        CMatrix acc = CMatrix::Identity(d, d);
        for (int p = 0; p < power; ++p) acc = acc * base;
        battery.emplace_back(spin, acc);
        break;
      }
      case 1: {  // random hermitean
        CMatrix m(d, d);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) m(i, j) = rng.complex_normal();
        battery.emplace_back(spin, CMatrix(0.5 * (m + m.adjoint())));
        break;
      }
      default: {  // random non-hermitean
        CMatrix m(d, d);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) m(i, j) = rng.complex_normal();
        battery.emplace_back(spin, m);
        break;
      }
    }
    ++idx;
  }
  return battery;
}

// ---------------------------------------------------------------------------
// Two-way consistency test on a held-out axis.
// ---------------------------------------------------------------------------

struct ConsistencyReport {
  Axis holdout;
  RVector direct;     // probabilities simulated from the true state
  RVector predicted;  // probabilities predicted from the reconstruction
  RVector z_scores;   // sampled mode only; empty in exact mode
  double max_abs_delta = 0.0;
  double quorum_residual = 0.0;
  // Residual threshold beyond which the quorum data themselves are flagged
  // as inconsistent (sampled mode).
  double residual_threshold = 0.0;
  bool pass = false;
  bool sampled = false;

  std::string to_text() const {
    std::ostringstream os;
    os << "holdout theta " << holdout.theta << " phi " << holdout.phi << "\n";
    os << "mode " << (sampled ? "sampled" : "exact") << "\n";
    for (int m = 0; m < direct.size(); ++m) {
      os << "outcome " << m << " direct " << direct[m] << " predicted "
         << predicted[m];
      if (sampled) os << " z " << z_scores[m];
      os << "\n";
    }
    os << "max-abs-delta " << max_abs_delta << "\n";
    if (sampled)
      os << "quorum-residual " << quorum_residual << " threshold "
         << residual_threshold << "\n";
    os << "verdict " << (pass ? "pass" : "fail") << "\n";
    return os.str();
  }
};

inline ConsistencyReport consistency_test_on_table(const IntensityTable& table,
                                                   const QuorumSpec& quorum,
                                                   const DensityMatrix& rho_true,
                                                   const Axis& holdout,
                                                   std::uint64_t seed);

// Compares the holdout-axis statistics obtained (a) directly from the true
// state and (b) through reconstruction from the quorum data.  Exact mode
// demands max |delta p| <= 1e-8; sampled mode scores each outcome with a
// binomial standard error and passes at |z| <= 4, and additionally flags
// quorum tables whose least-squares residual exceeds the noise scale.
inline ConsistencyReport consistency_test(const DensityMatrix& rho_true,
                                          const QuorumSpec& quorum,
                                          const Axis& holdout,
                                          std::uint64_t shots = 0,
                                          std::uint64_t seed = 0) {
  for (const Axis& axis : quorum.axes)
    if (holdout.angle_to(axis) <= 1e-6)
      throw HoldoutInQuorum("consistency_test: holdout axis coincides with a quorum axis");

  ConsistencyReport report;
  report.holdout = holdout;
  report.sampled = shots > 0;

  if (!report.sampled) {
    IntensityTable table = measure_exact(rho_true, quorum);
    ReconResult recon = reconstruct_mixed(table, quorum);
    report.direct = sg_probabilities(rho_true, holdout);
    report.predicted = sg_probabilities(recon.rho_hat, holdout);
    report.quorum_residual = recon.residual;
    report.max_abs_delta =
        (report.direct - report.predicted).cwiseAbs().maxCoeff();
    report.pass = report.max_abs_delta <= 1e-8;
    return report;
  }

  IntensityTable table =
      measure_sampled(rho_true, quorum, shots, derive_seed(seed, 1));
  return consistency_test_on_table(table, quorum, rho_true, holdout, seed);
}

// Sampled-mode core, split out so corrupted tables can be fed in directly.
inline ConsistencyReport consistency_test_on_table(const IntensityTable& table,
                                                   const QuorumSpec& quorum,
                                                   const DensityMatrix& rho_true,
                                                   const Axis& holdout,
                                                   std::uint64_t seed) {
  for (const Axis& axis : quorum.axes)
    if (holdout.angle_to(axis) <= 1e-6)
      throw HoldoutInQuorum("consistency_test: holdout axis coincides with a quorum axis");
  if (table.provenance != Provenance::Sampled || table.shots == 0)
    throw InvalidArgument("consistency_test_on_table: need a sampled table");

  ConsistencyReport report;
  report.holdout = holdout;
  report.sampled = true;
  int d = rho_true.spin.dimension();
  std::uint64_t shots = table.shots;

  ReconResult recon = reconstruct_mixed(table, quorum);
  report.quorum_residual = recon.residual;

  // Expected least-squares residual from multinomial noise alone: the
  // misfit lives in the (rows - (d^2 - 1))-dimensional complement of the
  // map's range.
  double noise_var = 0.0;
  for (int k = 0; k < table.axis_count(); ++k)
    for (int m = 0; m < d; ++m) {
      double p = table.probabilities(k, m);
      noise_var += p * (1.0 - p) / double(shots);
    }
  int rows = table.axis_count() * d;
  int range_dim = d * d - 1;
  double complement = std::max(rows - range_dim, 1);
  double expected_residual =
      std::sqrt(noise_var * complement / double(rows));
  report.residual_threshold = 6.0 * expected_residual + 1e-12;

  // Direct branch: sample the holdout axis too.
  IntensityTable direct = measure_sampled(
      rho_true, explicit_quorum({holdout}), shots, derive_seed(seed, 2));
  report.direct = direct.probabilities.row(0).transpose();
  report.predicted = sg_probabilities(recon.rho_hat, holdout);

  report.z_scores.resize(d);
  for (int m = 0; m < d; ++m) {
    double q = report.predicted[m];
    double p_hat = report.direct[m];
    double var = (q * (1.0 - q) + p_hat * (1.0 - p_hat)) / double(shots);
    double se = std::sqrt(std::max(var, 1.0 / double(shots * shots)));
    report.z_scores[m] = (p_hat - q) / se;
  }
  report.max_abs_delta =
      (report.direct - report.predicted).cwiseAbs().maxCoeff();
  bool z_ok = report.z_scores.cwiseAbs().maxCoeff() <= 4.0;
  bool residual_ok = report.quorum_residual <= report.residual_threshold;
  report.pass = z_ok && residual_ok;
  return report;
}

}  // namespace spintomo
