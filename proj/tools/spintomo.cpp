// spintomo: spin-state reconstruction from Stern-Gerlach intensities.
//
// Subcommands: gen, measure, certify, design, reconstruct {mixed|pure},
// partners, uniqueness, indirect, consistency, dynamics, particle-demo,
// selftest.  The environment variable SPINTOMO_SEED sets the default seed.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "spintomo/dynamics.hpp"
#include "spintomo/indirect.hpp"
#include "spintomo/io.hpp"
#include "spintomo/particle.hpp"
#include "spintomo/recon_mixed.hpp"
#include "spintomo/recon_pure.hpp"
#include "spintomo/selftest.hpp"

namespace {

using namespace spintomo;

SpinValue parse_spin(const std::string& text) {
  int p = 0, q = 0;
  if (std::sscanf(text.c_str(), "%d/%d", &p, &q) == 2) {
    if (q != 2 || p < 0)
      throw InvalidArgument("spin: expected 'n' or 'p/2', got " + text);
    return SpinValue(p);
  }
  int n = 0;
  if (std::sscanf(text.c_str(), "%d", &n) == 1 && n >= 0) return SpinValue(2 * n);
  throw InvalidArgument("spin: cannot parse '" + text + "'");
}

QuorumSpec parse_cone(SpinValue spin, const std::string& text) {
  int count = 0;
  double theta = 0;
  if (std::sscanf(text.c_str(), "K=%d,theta=%lf", &count, &theta) != 2)
    throw InvalidArgument("cone: expected 'K=<int>,theta=<float>', got " + text);
  return cone_axes(spin, count, theta);
}

Axis parse_axis(const std::string& text) {
  if (text == "x") return Axis::x();
  if (text == "y") return Axis::y();
  if (text == "z") return Axis::z();
  double theta = 0, phi = 0;
  if (std::sscanf(text.c_str(), "%lf,%lf", &theta, &phi) != 2)
    throw InvalidArgument("axis: expected x|y|z or 'theta,phi', got " + text);
  return Axis(theta, phi);
}

Hamiltonian parse_hamiltonian(SpinValue spin, const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos)
    throw InvalidArgument("hamiltonian: expected 'zeeman:<params>'");
  std::string family = text.substr(0, colon);
  if (family != "zeeman")
    throw InvalidArgument("hamiltonian: unknown family '" + family + "'");
  double omega = 1.0, kappa = 0.0;
  Axis axis = Axis::z();
  std::string params = text.substr(colon + 1);
  std::istringstream ps(params);
  std::string item;
  while (std::getline(ps, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("hamiltonian: bad parameter '" + item + "'");
    std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    if (key == "omega")
      omega = std::stod(value);
    else if (key == "kappa")
      kappa = std::stod(value);
    else if (key == "axis")
      axis = parse_axis(value);
    else if (key == "theta" || key == "phi") {
      // allow axis=theta then phi=... style: axis given as two scalars
      if (key == "theta") axis.theta = std::stod(value);
      else axis.phi = std::stod(value);
    } else
      throw InvalidArgument("hamiltonian: unknown parameter '" + key + "'");
  }
  return kappa == 0.0 ? Hamiltonian::zeeman(spin, omega, axis)
                      : Hamiltonian::quadratic(spin, omega, axis, kappa);
}

DensityMatrix read_any_state_as_density(const std::string& path) {
  try {
    return read_state(path).to_density();
  } catch (const IoError&) {
    return read_density(path);
  }
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SPINTOMO_SEED"))
    return std::strtoull(env, nullptr, 10);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spintomo: spin-state reconstruction from Stern-Gerlach data"};
  app.require_subcommand(1);

  std::uint64_t seed = default_seed();
  std::string spin_text = "1/2";
  std::string table_path, state_path, quorum_path, operator_path, out_path;
  std::string cone_text, strategy_text = "cone-scan", holdout_text;
  std::string hamiltonian_text = "zeeman:omega=1.0,axis=z", third_axis_text;
  std::string gen_type = "pure";
  std::uint64_t shots = 0;
  int rank = 0, axes_count = 3, trials = 200, steps = 200;
  int grid_n = 256;
  double grid_l = 10.0, t0 = 0.0, t1 = 10.0;
  bool allow_minimum_norm = false, use_tripod = false, check_closure = false;

  auto* gen = app.add_subcommand("gen", "generate a random state or density");
  gen->add_option("--spin", spin_text)->required();
  gen->add_option("--type", gen_type)->check(CLI::IsMember({"pure", "density"}));
  gen->add_option("--rank", rank);
  gen->add_option("--seed", seed);
  gen->add_option("--out", out_path)->required();

  auto* measure = app.add_subcommand("measure", "simulate intensities");
  measure->add_option("--state", state_path)->required();
  measure->add_option("--quorum", quorum_path);
  measure->add_option("--cone", cone_text);
  measure->add_flag("--tripod", use_tripod);
  measure->add_option("--shots", shots);
  measure->add_option("--seed", seed);
  measure->add_option("--out", out_path)->required();

  auto* certify = app.add_subcommand("certify", "certify quorum injectivity");
  certify->add_option("--spin", spin_text)->required();
  certify->add_option("--cone", cone_text);
  certify->add_option("--quorum", quorum_path);

  auto* design = app.add_subcommand("design", "search axis configurations");
  design->add_option("--spin", spin_text)->required();
  design->add_option("--axes", axes_count)->required();
  design->add_option("--strategy", strategy_text)
      ->check(CLI::IsMember({"cone-scan", "random-frames"}));
  design->add_option("--seed", seed);
  design->add_option("--out", out_path);

  auto* reconstruct = app.add_subcommand("reconstruct", "invert a table");
  reconstruct->require_subcommand(1);
  auto* rec_mixed = reconstruct->add_subcommand("mixed", "linear inversion");
  rec_mixed->add_option("--table", table_path)->required();
  rec_mixed->add_option("--quorum", quorum_path);
  rec_mixed->add_flag("--allow-minimum-norm", allow_minimum_norm);
  rec_mixed->add_option("--out", out_path)->required();
  auto* rec_pure = reconstruct->add_subcommand("pure", "three-axis method");
  rec_pure->add_option("--table", table_path)->required();
  rec_pure->add_option("--out", out_path)->required();

  auto* partners = app.add_subcommand("partners", "enumerate Pauli partners");
  partners->add_option("--state", state_path)->required();
  partners->add_option("--third-axis", third_axis_text);

  auto* uniqueness = app.add_subcommand("uniqueness", "algebraic probe");
  uniqueness->add_option("--state", state_path)->required();
  uniqueness->add_option("--trials", trials);
  uniqueness->add_option("--seed", seed);

  auto* indirect = app.add_subcommand("indirect", "indirect expectation");
  indirect->add_option("--table", table_path)->required();
  indirect->add_option("--operator", operator_path)->required();
  indirect->add_option("--quorum", quorum_path);

  auto* consistency = app.add_subcommand("consistency", "two-way test");
  consistency->add_option("--state", state_path)->required();
  consistency->add_option("--quorum", quorum_path)->required();
  consistency->add_option("--holdout", holdout_text)->required();
  consistency->add_option("--shots", shots);
  consistency->add_option("--seed", seed);

  auto* dynamics = app.add_subcommand("dynamics", "expectation-value dynamics");
  dynamics->add_option("--state", state_path)->required();
  dynamics->add_option("--hamiltonian", hamiltonian_text);
  dynamics->add_option("--t0", t0);
  dynamics->add_option("--t1", t1);
  dynamics->add_option("--steps", steps);
  dynamics->add_option("--quorum", quorum_path)->required();
  dynamics->add_flag("--check-closure", check_closure);
  dynamics->add_option("--out", out_path);

  auto* particle = app.add_subcommand("particle-demo", "Pauli counterexample");
  particle->add_option("--n", grid_n);
  particle->add_option("--l", grid_l);
  particle->add_option("--out", out_path);

  auto* selftest = app.add_subcommand("selftest", "acceptance battery");
  selftest->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << app.help() << std::endl;
    app.exit(e);
    return 1;
  }

  try {
    if (*gen) {
      SpinValue spin = parse_spin(spin_text);
      if (gen_type == "pure") {
        write_state(random_pure(spin, seed), out_path);
      } else {
        int r = rank > 0 ? rank : spin.dimension();
        write_density(random_density(spin, seed, r), out_path);
      }
    } else if (*measure) {
      DensityMatrix rho = read_any_state_as_density(state_path);
      QuorumSpec quorum =
          !quorum_path.empty() ? read_quorum(quorum_path)
          : !cone_text.empty() ? parse_cone(rho.spin, cone_text)
          : use_tripod         ? default_tripod()
                               : throw InvalidArgument(
                                     "measure: need --quorum, --cone or --tripod");
      IntensityTable table = shots > 0
                                 ? measure_sampled(rho, quorum, shots, seed)
                                 : measure_exact(rho, quorum);
      write_table(table, out_path);
    } else if (*certify) {
      SpinValue spin = parse_spin(spin_text);
      QuorumSpec quorum = !quorum_path.empty()
                              ? read_quorum(quorum_path)
                              : parse_cone(spin, cone_text);
      std::cout << certify_quorum(spin, quorum).to_text();
    } else if (*design) {
      SpinValue spin = parse_spin(spin_text);
      DesignStrategy strategy = strategy_text == "random-frames"
                                    ? DesignStrategy::RandomFrames
                                    : DesignStrategy::ConeScan;
      DesignResult result = design_axes(spin, axes_count, strategy, 89, seed);
      std::cout << "condition-number " << format_double(result.condition_number)
                << "\n";
      for (const Axis& axis : result.quorum.axes)
        std::cout << "axis " << format_double(axis.theta) << " "
                  << format_double(axis.phi) << "\n";
      if (!out_path.empty()) write_quorum(result.quorum, out_path);
    } else if (*rec_mixed) {
      IntensityTable table = read_table(table_path);
      QuorumSpec quorum = !quorum_path.empty() ? read_quorum(quorum_path)
                                               : explicit_quorum(table.axes);
      ReconOptions opts;
      opts.allow_minimum_norm = allow_minimum_norm;
      ReconResult result = reconstruct_mixed(table, quorum, opts);
      write_density(result.rho_hat, out_path);
      std::cout << "residual " << format_double(result.residual) << "\n"
                << "rank " << result.rank << "\n"
                << "condition-number "
                << format_double(result.condition_number) << "\n"
                << "projected " << (result.projected ? "yes" : "no") << "\n";
    } else if (*rec_pure) {
      IntensityTable table = read_table(table_path);
      PureReconResult result = reconstruct_pure(table);
      write_state(result.state, out_path);
      std::cout << "residual " << format_double(result.residual) << "\n";
    } else if (*partners) {
      PureState psi = read_state(state_path);
      PartnerSet set = partners_nearby_axes(psi);
      if (!third_axis_text.empty()) {
        Axis third = parse_axis(third_axis_text);
        IntensityTable table = measure_exact(psi, explicit_quorum({third}));
        select_by_third_axis(set, table);
      }
      int n_diff = psi.spin.dimension() - 1;
      for (std::size_t i = 0; i < set.candidates.size(); ++i) {
        std::cout << "# pattern ";
        for (int j = n_diff - 1; j >= 0; --j)
          std::cout << ((set.signs[i] >> j) & 1u);
        if (set.selected && *set.selected == int(i)) std::cout << " selected";
        std::cout << "\n";
        const PureState& c = set.candidates[i];
        std::cout << "spin " << c.spin.two_s() << "\n";
        for (int m = 0; m < c.spin.dimension(); ++m)
          std::cout << (c.spin.two_s() - 2 * m) << "/2 "
                    << format_double(c.amplitudes[m].real()) << " "
                    << format_double(c.amplitudes[m].imag()) << "\n";
      }
    } else if (*uniqueness) {
      PureState psi = read_state(state_path);
      UniquenessReport report = uniqueness_probe(psi, trials, seed);
      std::cout << "trials " << report.trials << "\n"
                << "best-nonconstant-defect "
                << format_double(report.best_defect) << "\n";
    } else if (*indirect) {
      IntensityTable table = read_table(table_path);
      GenericOperator op = read_operator(operator_path);
      QuorumSpec quorum = !quorum_path.empty() ? read_quorum(quorum_path)
                                               : explicit_quorum(table.axes);
      IndirectResult result = indirect_expectation(table, quorum, op);
      std::cout << "value " << format_double(result.value.real()) << " "
                << format_double(result.value.imag()) << "\n"
                << "residual " << format_double(result.rho_source.residual)
                << "\n";
    } else if (*consistency) {
      DensityMatrix rho = read_any_state_as_density(state_path);
      QuorumSpec quorum = read_quorum(quorum_path);
      Axis holdout = parse_axis(holdout_text);
      ConsistencyReport report =
          consistency_test(rho, quorum, holdout, shots, seed);
      std::cout << report.to_text();
    } else if (*dynamics) {
      DensityMatrix rho = read_any_state_as_density(state_path);
      Hamiltonian h = parse_hamiltonian(rho.spin, hamiltonian_text);
      QuorumSpec quorum = read_quorum(quorum_path);
      if (steps < 1) throw InvalidArgument("dynamics: steps must be >= 1");
      std::vector<double> times;
      for (int i = 0; i <= steps; ++i)
        times.push_back(t0 + (t1 - t0) * double(i) / double(steps));
      QuorumTrajectory traj = quorum_trajectory(rho, h, times, quorum);
      std::ostream* os = &std::cout;
      std::ofstream file;
      if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw IoError("cannot open " + out_path + " for writing");
        os = &file;
      }
      int d = rho.spin.dimension();
      *os << "# t k m p\n";
      for (std::size_t i = 0; i < traj.times.size(); ++i)
        for (int k = 0; k < quorum.size(); ++k)
          for (int m = 0; m < d; ++m)
            *os << format_double(traj.times[i]) << " " << k << " " << m << " "
                << format_double(traj.values[i][k * d + m]) << "\n";
      if (check_closure) {
        ClosureReport closure = closure_check(traj, h);
        std::cout << "closure-max-deviation "
                  << format_double(closure.max_deviation) << "\n";
      }
    } else if (*particle) {
      GridWavefunction psi = make_counterexample(grid_n, grid_l);
      PauliPartnerReport report = pauli_partner_check(psi);
      std::ostream* os = &std::cout;
      std::ofstream file;
      if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw IoError("cannot open " + out_path + " for writing");
        os = &file;
      }
      *os << "parity-defect " << format_double(report.parity_defect) << "\n"
          << "max-position-density-diff "
          << format_double(report.max_position_density_diff) << "\n"
          << "max-momentum-density-diff "
          << format_double(report.max_momentum_density_diff) << "\n"
          << "gram-determinant " << format_double(report.gram_determinant)
          << "\n"
          << "conjugate-overlap " << format_double(report.conjugate_overlap)
          << "\n";
      *os << "# x density conj-density\n";
      GridWavefunction tilde = psi.conjugate();
      for (int j = 0; j < psi.n; ++j)
        *os << format_double(psi.x_of(j)) << " "
            << format_double(std::norm(psi.values[j])) << " "
            << format_double(std::norm(tilde.values[j])) << "\n";
      MomentumDensity mp = momentum_density(psi);
      MomentumDensity mt = momentum_density(tilde);
      *os << "# p density conj-density\n";
      for (int k = 0; k < psi.n; ++k)
        *os << format_double(mp.p[k]) << " " << format_double(mp.density[k])
            << " " << format_double(mt.density[k]) << "\n";
    } else if (*selftest) {
      SelftestReport report = run_selftest(seed);
      std::cout << report.to_text();
      return report.all_pass ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return int(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
