#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "spintomo/dynamics.hpp"
#include "spintomo/indirect.hpp"
#include "spintomo/particle.hpp"
#include "spintomo/recon_mixed.hpp"
#include "spintomo/recon_pure.hpp"

namespace spintomo {

// Built-in acceptance battery.  Every check is deterministic for a fixed
// seed so the emitted report is byte-identical across runs.

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace selftest_detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

// Random pure state with all moduli bounded away from zero (generic).
inline PureState random_generic_pure(SpinValue spin, std::uint64_t seed) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    PureState psi = random_pure(spin, derive_seed(seed, std::uint64_t(attempt)));
    double min_mod = 1.0;
    for (int i = 0; i < psi.amplitudes.size(); ++i)
      min_mod = std::min(min_mod, std::abs(psi.amplitudes[i]));
    if (min_mod > 1e-2) return psi;
  }
  throw NoConvergence("random_generic_pure: no generic draw found");
}

// --- criterion 1: mixed round-trip ---------------------------------------

inline CheckResult mixed_round_trip(std::uint64_t seed) {
  double worst = 0.0;
  for (int two_s : {1, 2, 3, 4, 5, 6}) {
    SpinValue spin(two_s);
    DesignResult design =
        design_axes(spin, 2 * two_s + 1, DesignStrategy::ConeScan);
    for (int trial = 0; trial < 20; ++trial) {
      DensityMatrix rho = random_density(
          spin, derive_seed(seed, std::uint64_t(two_s * 100 + trial)),
          spin.dimension());
      IntensityTable table = measure_exact(rho, design.quorum);
      ReconResult recon = reconstruct_mixed(table, design.quorum);
      worst = std::max(worst, (recon.rho_hat.matrix - rho.matrix).norm());
    }
  }
  return {"mixed-round-trip", worst <= 1e-8, "max-frobenius-error " + num(worst)};
}

// --- criterion 2: quorum-count audit -------------------------------------

// The SVD rank oracle is the authority here: the (2s+1)-axis cone is
// deficient, and the minimal injective axis count is 4s+1 (Newton-Young),
// not the naive counting suggestion 2s+2 — each axis pins only one value of
// each rank-j multipole form, so the oracle rank is 1 + sum_j min(K, 2j+1).
// Every certified deficit must match that prediction and be stated in the
// report.
inline CheckResult quorum_count_audit(std::uint64_t /*seed*/) {
  std::ostringstream detail;
  bool pass = true;
  for (int two_s : {1, 2}) {
    SpinValue spin(two_s);
    int d = spin.dimension();
    CertifyReport minimal = certify_quorum(spin, cone_axes(spin, d, 1.0));
    CertifyReport counting =
        certify_quorum(spin, generic_cone_axes(spin, d + 1, 1.0));
    CertifyReport newton_young =
        certify_quorum(spin, cone_axes(spin, 2 * two_s + 1, 1.0));
    int dd = d * d;
    pass = pass && minimal.deficit >= 1 &&
           minimal.rank == generic_axis_rank(spin, d) &&
           counting.rank == generic_axis_rank(spin, d + 1) &&
           newton_young.deficit == 0 &&
           minimal.to_text().find("deficit") != std::string::npos &&
           minimal.note.find("4s+1") != std::string::npos;
    // K = 2s+2 closes the gap only when it already reaches 4s+1 (s = 1/2).
    int expected_counting_deficit = dd - generic_axis_rank(spin, d + 1);
    pass = pass && counting.deficit == expected_counting_deficit;
    detail << "2s=" << two_s << " deficits " << minimal.deficit << "/"
           << counting.deficit << "/" << newton_young.deficit << " ";
  }
  return {"quorum-count-audit", pass, detail.str()};
}

// --- criterion 3: pure round-trip ----------------------------------------

inline CheckResult pure_round_trip(std::uint64_t seed) {
  double worst_infidelity = 0.0;
  std::vector<QuorumSpec> tripods = {
      default_tripod(),
      tripod_axes(Axis(0.3, 0.1), Axis(1.1, 2.0), Axis(2.0, 4.1))};
  for (int two_s = 1; two_s <= 8; ++two_s) {
    SpinValue spin(two_s);
    for (int trial = 0; trial < 100; ++trial) {
      PureState psi = random_generic_pure(
          spin, derive_seed(seed, std::uint64_t(two_s * 1000 + trial)));
      for (const QuorumSpec& tripod : tripods) {
        IntensityTable table = measure_exact(psi, tripod);
        PureReconResult recon = reconstruct_pure(table);
        worst_infidelity =
            std::max(worst_infidelity, 1.0 - recon.state.fidelity(psi));
      }
    }
  }
  return {"pure-round-trip", worst_infidelity <= 1e-8,
          "max-infidelity " + num(worst_infidelity)};
}

// --- criterion 4: partner census -----------------------------------------

inline CheckResult partner_census(std::uint64_t seed) {
  bool pass = true;
  std::ostringstream detail;
  QuorumSpec z_only = explicit_quorum({Axis::z()});
  for (int two_s : {1, 2, 3, 4}) {
    SpinValue spin(two_s);
    int expected = 1 << two_s;
    for (int trial = 0; trial < 5; ++trial) {
      PureState psi = random_generic_pure(
          spin, derive_seed(seed, std::uint64_t(0xC4000 + two_s * 64 + trial)));
      PartnerSet partners = partners_nearby_axes(psi);
      if (int(partners.candidates.size()) != expected) pass = false;

      RVector base_rate;
      {
        const double eps = 1e-6;
        RVector pp = sg_probabilities(psi, Axis(eps, 0.0));
        RVector pm = sg_probabilities(psi, Axis(eps, kPi));
        base_rate = (pp - pm) / (2.0 * eps);
      }
      for (const PureState& candidate : partners.candidates) {
        if (!verify_same_intensities(psi, candidate, z_only, 1e-10))
          pass = false;
        const double eps = 1e-6;
        RVector cp = sg_probabilities(candidate, Axis(eps, 0.0));
        RVector cm = sg_probabilities(candidate, Axis(eps, kPi));
        RVector rate = (cp - cm) / (2.0 * eps);
        if ((rate - base_rate).cwiseAbs().maxCoeff() > 1e-6) pass = false;
      }

      // The nearby axes lie in the x-z plane; the perpendicular axis is y.
      // (x-axis intensities cannot work: the rotation to x is generated by
      // S_y, whose matrix is real, so they are conjugation-blind.)
      IntensityTable y_table = measure_exact(psi, explicit_quorum({Axis::y()}));
      try {
        PureState chosen = select_by_third_axis(partners, y_table);
        if (chosen.fidelity(psi) < 1.0 - 1e-9) pass = false;
      } catch (const Error&) {
        pass = false;
      }
    }
    detail << "2s=" << two_s << " count " << expected << " ";
  }
  return {"partner-census", pass, detail.str()};
}

// --- criterion 5: measured-number audit ----------------------------------

inline CheckResult measured_number_audit(std::uint64_t /*seed*/) {
  bool pass = true;
  for (int two_s = 1; two_s <= 8; ++two_s) {
    SpinValue spin(two_s);
    // 3 axes, 2s+1 intensities each, minus one normalization per axis.
    int from_tables = 3 * spin.dimension() - 3;
    if (measured_number_count(spin) != from_tables) pass = false;
    if (from_tables != 3 * two_s) pass = false;  // = 6s
  }
  return {"measured-number-audit", pass, "3(2s+1)-3 == 6s for 2s in 1..8"};
}

// --- criterion 6: indirect measurement -----------------------------------

inline CheckResult indirect_measurement(std::uint64_t seed) {
  std::ostringstream detail;
  bool pass = true;

  // Exact battery on a designed quorum, s = 3/2.
  {
    SpinValue spin(3);
    DesignResult design = design_axes(spin, 7, DesignStrategy::ConeScan);
    DensityMatrix rho =
        random_density(spin, derive_seed(seed, 0xB17), spin.dimension());
    IntensityTable table = measure_exact(rho, design.quorum);
    double worst = 0.0;
    for (const GenericOperator& op :
         operator_battery(spin, derive_seed(seed, 0xB18), 24)) {
      IndirectResult indirect = indirect_expectation(table, design.quorum, op);
      worst = std::max(worst, std::abs(indirect.value - expectation(rho, op)));
    }
    pass = pass && worst <= 1e-8;
    detail << "battery-max-error " << num(worst) << " ";
  }

  // Sampled consistency over 50 seeds, s = 1, 1e5 shots per axis.
  {
    SpinValue spin(2);
    DesignResult design = design_axes(spin, 5, DesignStrategy::ConeScan);
    DensityMatrix rho =
        random_density(spin, derive_seed(seed, 0xB19), spin.dimension());
    Axis holdout(0.77, 0.3);
    int passed = 0;
    for (int run = 0; run < 50; ++run) {
      ConsistencyReport report = consistency_test(
          rho, design.quorum, holdout, 100000,
          derive_seed(seed, std::uint64_t(0xB20 + run)));
      if (report.pass) ++passed;
    }
    pass = pass && passed >= 47;
    detail << "sampled-pass " << passed << "/50 ";

    // Corruption of one entry by 0.05 must be flagged.
    IntensityTable corrupt = measure_sampled(rho, design.quorum, 100000,
                                             derive_seed(seed, 0xB60));
    corrupt.probabilities(0, 0) += 0.05;
    ConsistencyReport flagged = consistency_test_on_table(
        corrupt, design.quorum, rho, holdout, derive_seed(seed, 0xB61));
    pass = pass && !flagged.pass;
    detail << "corruption-flagged " << (flagged.pass ? "no" : "yes");
  }
  return {"indirect-measurement", pass, detail.str()};
}

// --- criterion 7: dynamics closure ---------------------------------------

inline CheckResult dynamics_closure(std::uint64_t seed) {
  bool pass = true;
  std::ostringstream detail;
  Axis field(0.4, 0.9);
  for (int two_s : {1, 2}) {
    SpinValue spin(two_s);
    DesignResult design =
        design_axes(spin, 2 * two_s + 1, DesignStrategy::ConeScan);
    DensityMatrix rho0 = random_density(
        spin, derive_seed(seed, std::uint64_t(0xD7 + two_s)), spin.dimension());
    std::vector<Hamiltonian> hams = {
        Hamiltonian::zeeman(spin, 1.0, field),
        Hamiltonian::quadratic(spin, 1.0, field, 0.3)};
    for (std::size_t hi = 0; hi < hams.size(); ++hi) {
      const Hamiltonian& h = hams[hi];
      std::vector<double> times;
      for (int i = 0; i <= 100; ++i) times.push_back(10.0 * i / 100.0);
      QuorumTrajectory traj = quorum_trajectory(rho0, h, times, design.quorum);
      ClosureReport closure = closure_check(traj, h);
      if (closure.max_deviation > 1e-8) pass = false;

      // Conservation along the exact flow.
      Propagator prop(h);
      double purity0 = rho0.purity();
      double energy0 = expectation(rho0, h.matrix).real();
      double worst_cons = 0.0;
      for (double t : {2.5, 5.0, 10.0}) {
        DensityMatrix rho_t = prop.evolve(rho0, t);
        worst_cons = std::max(
            worst_cons, std::abs(rho_t.matrix.trace().real() - 1.0));
        worst_cons = std::max(worst_cons, std::abs(rho_t.purity() - purity0));
        worst_cons = std::max(
            worst_cons, std::abs(expectation(rho_t, h.matrix).real() - energy0));
      }
      if (worst_cons > 1e-12) pass = false;

      // Second-order convergence of the generator probe.
      double gap1 = generator_probe(rho0, h, design.quorum, 1e-3).max_gap;
      double gap2 = generator_probe(rho0, h, design.quorum, 5e-4).max_gap;
      double ratio = gap2 > 0 ? gap1 / gap2 : 4.0;
      if (ratio < 3.0 || ratio > 5.0) pass = false;
      if (two_s == 1 && hi == 0)
        detail << "closure " << num(closure.max_deviation) << " conservation "
               << num(worst_cons) << " fd-ratio " << num(ratio) << " ";
    }
  }
  return {"dynamics-closure", pass, detail.str()};
}

// --- criterion 8: particle counterexample --------------------------------

inline CheckResult particle_counterexample(std::uint64_t /*seed*/) {
  GridWavefunction psi = make_counterexample(256, 10.0);
  PauliPartnerReport report = pauli_partner_check(psi);
  bool pass = report.max_position_density_diff <= 1e-12 &&
              report.max_momentum_density_diff <= 1e-10 &&
              report.gram_determinant > 1e-6 && !report.degenerate;

  double alpha_err = 0.0;
  alpha_err = std::max(alpha_err,
                       std::abs(coherent_alpha(std::sqrt(2.0), 0, 1, 1, 1) -
                                Complex(1, 0)));
  alpha_err =
      std::max(alpha_err, std::abs(coherent_alpha(0, 0, 1, 1, 1)));
  alpha_err = std::max(
      alpha_err, std::abs(coherent_alpha(1, 1, 2, 0.5, 1) -
                          Complex(std::sqrt(0.5), 1.0 / std::sqrt(2.0))));
  pass = pass && alpha_err <= 1e-12;

  std::ostringstream detail;
  detail << "x-diff " << num(report.max_position_density_diff) << " p-diff "
         << num(report.max_momentum_density_diff) << " gram "
         << num(report.gram_determinant) << " alpha-err " << num(alpha_err);
  return {"particle-counterexample", pass, detail.str()};
}

}  // namespace selftest_detail

struct SelftestReport {
  std::vector<CheckResult> checks;
  bool all_pass = true;

  std::string to_text() const {
    std::ostringstream os;
    for (const CheckResult& c : checks)
      os << (c.pass ? "PASS" : "FAIL") << " " << c.name << ": " << c.detail
         << "\n";
    os << (all_pass ? "selftest: all checks passed"
                    : "selftest: FAILURES present")
       << "\n";
    return os.str();
  }
};

inline SelftestReport run_selftest(std::uint64_t seed) {
  using namespace selftest_detail;
  SelftestReport report;
  report.checks.push_back(mixed_round_trip(seed));
  report.checks.push_back(quorum_count_audit(seed));
  report.checks.push_back(pure_round_trip(seed));
  report.checks.push_back(partner_census(seed));
  report.checks.push_back(measured_number_audit(seed));
  report.checks.push_back(indirect_measurement(seed));
  report.checks.push_back(dynamics_closure(seed));
  report.checks.push_back(particle_counterexample(seed));
  // Determinism spot check: the first criterion re-run with the same seed
  // must reproduce its detail string exactly.
  CheckResult again = mixed_round_trip(seed);
  bool deterministic = again.detail == report.checks[0].detail;
  report.checks.push_back({"determinism", deterministic,
                           deterministic ? "repeated run is byte-identical"
                                         : "repeated run differs"});
  for (const CheckResult& c : report.checks)
    report.all_pass = report.all_pass && c.pass;
  return report;
}

}  // namespace spintomo
