#include <doctest.h>

#include "spintomo/recon_pure.hpp"

using namespace spintomo;

namespace {

PureState generic_state(SpinValue spin, std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    PureState psi = random_pure(spin, derive_seed(seed, attempt));
    double min_mod = 1.0;
    for (int i = 0; i < psi.amplitudes.size(); ++i)
      min_mod = std::min(min_mod, std::abs(psi.amplitudes[i]));
    if (min_mod > 1e-2) return psi;
  }
}

}  // namespace

TEST_CASE("partners: s = 1/2 gives the state and its conjugate") {
  SpinValue spin(1);
  PureState psi = generic_state(spin, 1);
  PartnerSet set = partners_nearby_axes(psi);
  REQUIRE(int(set.candidates.size()) == 2);
  CHECK(set.candidates[0].fidelity(psi) == doctest::Approx(1.0));
  PureState conj(spin, psi.amplitudes.conjugate());
  CHECK(set.candidates[1].fidelity(conj) == doctest::Approx(1.0));
}

TEST_CASE("partners: real amplitudes collapse to a single candidate") {
  SpinValue spin(2);
  CVector a(3);
  a << 1, 1, 1;
  a /= a.norm();
  PartnerSet set = partners_nearby_axes(PureState(spin, a));
  CHECK(int(set.candidates.size()) == 1);
}

TEST_CASE("partners: census and shared intensities for a generic s = 1 state") {
  SpinValue spin(2);
  PureState psi = generic_state(spin, 2);
  PartnerSet set = partners_nearby_axes(psi);
  REQUIRE(int(set.candidates.size()) == 4);
  QuorumSpec z_only = explicit_quorum({Axis::z()});
  const double eps = 1e-6;
  RVector base =
      (sg_probabilities(psi, Axis(eps, 0.0)) -
       sg_probabilities(psi, Axis(eps, kPi))) /
      (2 * eps);
  for (const PureState& candidate : set.candidates) {
    CHECK(verify_same_intensities(psi, candidate, z_only, 1e-12));
    RVector rate =
        (sg_probabilities(candidate, Axis(eps, 0.0)) -
         sg_probabilities(candidate, Axis(eps, kPi))) /
        (2 * eps);
    CHECK((rate - base).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("partners: zero amplitude is rejected with the offending index") {
  SpinValue spin(2);
  CVector a = CVector::Zero(3);
  a[0] = 1;
  try {
    partners_nearby_axes(PureState(spin, a));
    FAIL("expected ZeroAmplitude");
  } catch (const ZeroAmplitude& e) {
    CHECK(e.index >= 1);
  }
}

// The nearby axes live in the x-z plane, so the discriminating third axis is
// the perpendicular one, y.  (The rotation to x is generated by S_y, whose
// matrix is real, so x-axis intensities cannot separate psi from psi*.)
TEST_CASE("perpendicular axis singles out the true state") {
  SpinValue spin(2);
  PureState psi = generic_state(spin, 3);
  PartnerSet set = partners_nearby_axes(psi);
  IntensityTable y_table = measure_exact(psi, explicit_quorum({Axis::y()}));
  PureState chosen = select_by_third_axis(set, y_table);
  CHECK(chosen.fidelity(psi) >= 1.0 - 1e-10);
  CHECK(set.selected.has_value());
}

TEST_CASE("perpendicular axis rejects the conjugate for complex s = 1/2 states") {
  SpinValue spin(1);
  CVector a(2);
  a << std::cos(0.3), std::exp(Complex(0, 0.7)) * std::sin(0.3);
  PureState psi(spin, a);
  PartnerSet set = partners_nearby_axes(psi);
  REQUIRE(int(set.candidates.size()) == 2);
  IntensityTable y_table = measure_exact(psi, explicit_quorum({Axis::y()}));
  PureState chosen = select_by_third_axis(set, y_table);
  CHECK(chosen.fidelity(psi) >= 1.0 - 1e-10);
  PureState conj(spin, psi.amplitudes.conjugate());
  CHECK(chosen.fidelity(conj) < 1.0 - 1e-6);
}

TEST_CASE("measured-number audit: 3(2s+1) - 3 = 6s") {
  for (int two_s = 1; two_s <= 8; ++two_s)
    CHECK(measured_number_count(SpinValue(two_s)) == 3 * two_s);
}

TEST_CASE("reconstruct_pure: s = 1/2 textbook state on {z, x, y}") {
  SpinValue spin(1);
  CVector a(2);
  a << std::cos(0.3), std::exp(Complex(0, 0.7)) * std::sin(0.3);
  PureState psi(spin, a);
  IntensityTable table = measure_exact(psi, default_tripod());
  PureReconResult result = reconstruct_pure(table);
  CHECK(result.state.fidelity(psi) >= 1.0 - 1e-10);
  CHECK(result.residual <= 1e-8);
}

TEST_CASE("reconstruct_pure: s = 2 generic states on a skew tripod") {
  SpinValue spin(4);
  QuorumSpec tripod = tripod_axes(Axis(0.2, 0.5), Axis(1.3, 2.2), Axis(2.1, 4.6));
  for (int seed = 0; seed < 20; ++seed) {
    PureState psi = generic_state(spin, 100 + seed);
    IntensityTable table = measure_exact(psi, tripod);
    PureReconResult result = reconstruct_pure(table);
    CHECK(result.state.fidelity(psi) >= 1.0 - 1e-8);
  }
}

TEST_CASE("reconstruct_pure: basis state reports ZeroAmplitude") {
  SpinValue spin(2);
  CVector a = CVector::Zero(3);
  a[0] = 1;
  IntensityTable table = measure_exact(PureState(spin, a), default_tripod());
  CHECK_THROWS_AS(reconstruct_pure(table), ZeroAmplitude);
}

TEST_CASE("reconstruct_pure: coplanar axes raise NotTripod") {
  SpinValue spin(1);
  PureState psi = generic_state(spin, 5);
  Axis diag = Axis::from_unit_vector(
      (Axis::x().unit() + Axis::y().unit()).normalized());
  IntensityTable table =
      measure_exact(psi, explicit_quorum({Axis::x(), Axis::y(), diag}));
  CHECK_THROWS_AS(reconstruct_pure(table), NotTripod);
}

TEST_CASE("reconstruct_pure: residual invariant under swapping axes 2 and 3") {
  SpinValue spin(3);
  PureState psi = generic_state(spin, 6);
  QuorumSpec tripod = tripod_axes(Axis(0.4, 0.2), Axis(1.2, 1.8), Axis(2.2, 3.9));
  IntensityTable table = measure_exact(psi, tripod);
  PureReconResult forward = reconstruct_pure(table);

  IntensityTable swapped = table;
  std::swap(swapped.axes[1], swapped.axes[2]);
  RVector row1 = swapped.probabilities.row(1);
  swapped.probabilities.row(1) = swapped.probabilities.row(2);
  swapped.probabilities.row(2) = row1.transpose();
  PureReconResult backward = reconstruct_pure(swapped);

  CHECK(forward.state.fidelity(backward.state) >= 1.0 - 1e-8);
  CHECK(std::abs(forward.residual - backward.residual) <= 1e-8);
}

TEST_CASE("recovered projector reproduces the full intensity table") {
  SpinValue spin(2);
  PureState psi = generic_state(spin, 7);
  QuorumSpec tripod = default_tripod();
  IntensityTable table = measure_exact(psi, tripod);
  PureReconResult result = reconstruct_pure(table);
  IntensityTable again = measure_exact(result.state.to_density(), tripod);
  CHECK((again.probabilities - table.probabilities).cwiseAbs().maxCoeff() <=
        1e-8);
}

TEST_CASE("equal intensities: z-phase partners and global phases") {
  SpinValue spin(2);
  PureState psi = generic_state(spin, 8);
  RVector values(3);
  values << 0.4, -1.1, 2.2;
  PhasePolynomial h = PhasePolynomial::from_values(spin, values);
  PureState tilde = apply_z_phase(psi, h);
  CHECK(verify_same_intensities(psi, tilde, explicit_quorum({Axis::z()})));

  PureState phased(spin, CVector(std::exp(Complex(0, 1.234)) * psi.amplitudes));
  CHECK(verify_same_intensities(psi, phased, default_tripod()));

  // A genuinely flipped partner differs on x or y.
  PartnerSet set = partners_nearby_axes(psi);
  REQUIRE(set.candidates.size() >= 2);
  CHECK_FALSE(
      verify_same_intensities(psi, set.candidates[1], default_tripod()));
}

TEST_CASE("phase polynomial: interpolation matches Horner evaluation") {
  SpinValue spin(3);
  RVector values(4);
  values << 0.1, -0.9, 1.7, 0.3;
  PhasePolynomial poly = PhasePolynomial::from_values(spin, values);
  for (int i = 0; i < spin.dimension(); ++i)
    CHECK(poly.evaluate(spin.m_of_index(i)) ==
          doctest::Approx(values[i]).epsilon(1e-10));
}

TEST_CASE("uniqueness: constant polynomial triples have zero defect") {
  SpinValue spin(2);
  PureState psi = generic_state(spin, 9);
  PhasePolynomial c = PhasePolynomial::constant(spin, 0.77);
  CHECK(uniqueness_defect(psi, c, c, c) <= 1e-20);
}

TEST_CASE("uniqueness probe: generic s = 1 state resists non-constant triples") {
  SpinValue spin(2);
  PureState psi = generic_state(spin, 10);
  UniquenessReport report = uniqueness_probe(psi, 200);
  CHECK(report.best_defect > 1e-3);
}

TEST_CASE("uniqueness probe: s_z eigenstate admits a non-constant h") {
  SpinValue spin(2);
  CVector a = CVector::Zero(3);
  a[0] = 1;
  UniquenessReport report = uniqueness_probe(PureState(spin, a), 50);
  CHECK(report.best_defect <= 1e-6);
}
