#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spintomo/core.hpp"

namespace spintomo {

// ---------------------------------------------------------------------------
// Quorum geometries.
// ---------------------------------------------------------------------------

enum class QuorumKind { Cone, Tripod, ExplicitList };

struct QuorumSpec {
  QuorumKind kind = QuorumKind::ExplicitList;
  std::vector<Axis> axes;
  // Cone parameters, meaningful when kind == Cone.
  double cone_theta = 0.0;
  int cone_count = 0;
  bool cone_staggered = false;

  int size() const { return int(axes.size()); }
};

// K axes with equal polar angle theta and azimuths 2*pi*k/K.
inline QuorumSpec cone_axes(SpinValue /*spin*/, int count, double theta) {
  if (count < 1) throw InvalidArgument("cone_axes: K must be >= 1");
  if (theta <= 0.0 || theta >= kPi)
    throw InvalidArgument(
        "cone_axes: degenerate opening angle, all axes would coincide");
  QuorumSpec q;
  q.kind = QuorumKind::Cone;
  q.cone_theta = theta;
  q.cone_count = count;
  for (int k = 0; k < count; ++k)
    q.axes.emplace_back(theta, 2.0 * kPi * k / count);
  return q;
}

// Cone with generic (deterministically staggered) azimuths.  Equally spaced
// azimuths alias the azimuthal harmonics mu and mu - K whenever K <= 4s, so
// the equal-spacing cone of Eq.-(8) type can stay rank-deficient at every
// opening angle; the quadratic stagger breaks that aliasing.
inline QuorumSpec generic_cone_axes(SpinValue spin, int count, double theta) {
  QuorumSpec q = cone_axes(spin, count, theta);
  q.cone_staggered = true;
  for (int k = 0; k < count; ++k) {
    double stagger = 0.37 * double(k) * double(k) / double(count);
    q.axes[k] = Axis(theta, 2.0 * kPi * k / count + stagger);
  }
  return q;
}

inline double triple_product(const Axis& e1, const Axis& e2, const Axis& e3) {
  return e1.unit().dot(e2.unit().cross(e3.unit()));
}

// Three axes not in a plane: |e1 . (e2 x e3)| must exceed 1e-9.
inline QuorumSpec tripod_axes(const Axis& e1, const Axis& e2, const Axis& e3) {
  double tp = triple_product(e1, e2, e3);
  if (std::abs(tp) <= 1e-9)
    throw NotTripod("tripod_axes: axes are coplanar, triple product = " +
                    std::to_string(tp));
  QuorumSpec q;
  q.kind = QuorumKind::Tripod;
  q.axes = {e1, e2, e3};
  return q;
}

inline QuorumSpec default_tripod() {
  return tripod_axes(Axis::z(), Axis::x(), Axis::y());
}

inline QuorumSpec explicit_quorum(std::vector<Axis> axes) {
  if (axes.empty()) throw InvalidArgument("quorum: no axes");
  QuorumSpec q;
  q.kind = QuorumKind::ExplicitList;
  q.axes = std::move(axes);
  return q;
}

// ---------------------------------------------------------------------------
// Stern-Gerlach probabilities.
// ---------------------------------------------------------------------------

// p_m = <m, n| rho |m, n> = (U^dagger rho U)_mm.  One similarity transform
// per axis, reused by all m.  Negative round-off is clamped at 0; the vector
// is renormalized when |sum - 1| <= 1e-10, larger violations raise.
inline RVector sg_probabilities(const DensityMatrix& rho, const Axis& axis) {
  CMatrix u = rotation_to_axis(rho.spin, axis);
  CVector diag = (u.adjoint() * rho.matrix * u).diagonal();
  int d = rho.spin.dimension();
  RVector p(d);
  for (int m = 0; m < d; ++m) {
    double v = diag[m].real();
    if (v < 0) {
      if (v < -1e-14)
        throw InconsistentData("sg_probabilities: probability " +
                               std::to_string(v) + " below clamp threshold");
      v = 0.0;
    }
    p[m] = v;
  }
  double sum = p.sum();
  if (std::abs(sum - 1.0) > 1e-10)
    throw InconsistentData("sg_probabilities: probabilities sum to " +
                           std::to_string(sum));
  return p / sum;
}

inline RVector sg_probabilities(const PureState& psi, const Axis& axis) {
  return sg_probabilities(psi.to_density(), axis);
}

// ---------------------------------------------------------------------------
// Intensity tables.
// ---------------------------------------------------------------------------

enum class Provenance { Exact, Sampled };

// Probabilities p_m^(k) per axis k (rows) and outcome index m (columns,
// m descending from s).  Sampled tables also carry the raw counts.
struct IntensityTable {
  SpinValue spin;
  std::vector<Axis> axes;
  RMatrix probabilities;  // K x d
  Provenance provenance = Provenance::Exact;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  std::optional<Eigen::MatrixXi> counts;  // K x d, sampled mode only

  IntensityTable(SpinValue spin) : spin(spin) {}

  int axis_count() const { return int(axes.size()); }

  // Probabilities stacked axis-major, the layout used by MeasurementMap.
  RVector stacked() const {
    int d = spin.dimension();
    RVector v(axis_count() * d);
    for (int k = 0; k < axis_count(); ++k)
      v.segment(k * d, d) = probabilities.row(k).transpose();
    return v;
  }
};

inline IntensityTable measure_exact(const DensityMatrix& rho,
                                    const QuorumSpec& quorum) {
  IntensityTable t(rho.spin);
  t.axes = quorum.axes;
  int d = rho.spin.dimension();
  t.probabilities.resize(quorum.size(), d);
  for (int k = 0; k < quorum.size(); ++k)
    t.probabilities.row(k) = sg_probabilities(rho, quorum.axes[k]).transpose();
  return t;
}

// One multinomial sample of size `shots` per axis, inverse-CDF on the
// deterministic generator.  Per-axis sub-seeds derive from (seed, k) so
// parallel and serial runs agree.
inline IntensityTable measure_sampled(const DensityMatrix& rho,
                                      const QuorumSpec& quorum,
                                      std::uint64_t shots, std::uint64_t seed) {
  if (shots < 1) throw InvalidArgument("measure_sampled: shots must be >= 1");
  IntensityTable t(rho.spin);
  t.axes = quorum.axes;
  t.provenance = Provenance::Sampled;
  t.shots = shots;
  t.seed = seed;
  int d = rho.spin.dimension();
  t.probabilities.resize(quorum.size(), d);
  t.counts = Eigen::MatrixXi::Zero(quorum.size(), d);
  for (int k = 0; k < quorum.size(); ++k) {
    RVector p = sg_probabilities(rho, quorum.axes[k]);
    RVector cdf(d);
    double acc = 0;
    for (int m = 0; m < d; ++m) {
      acc += p[m];
      cdf[m] = acc;
    }
    cdf[d - 1] = 1.0;
    Rng rng(derive_seed(seed, std::uint64_t(k)));
    for (std::uint64_t n = 0; n < shots; ++n) {
      double u = rng.uniform();
      int m = 0;
      while (m < d - 1 && u >= cdf[m]) ++m;
      (*t.counts)(k, m) += 1;
    }
    for (int m = 0; m < d; ++m)
      t.probabilities(k, m) = double((*t.counts)(k, m)) / double(shots);
  }
  return t;
}

inline IntensityTable measure_exact(const PureState& psi,
                                    const QuorumSpec& quorum) {
  return measure_exact(psi.to_density(), quorum);
}

inline IntensityTable measure_sampled(const PureState& psi,
                                      const QuorumSpec& quorum,
                                      std::uint64_t shots, std::uint64_t seed) {
  return measure_sampled(psi.to_density(), quorum, shots, seed);
}

}  // namespace spintomo
