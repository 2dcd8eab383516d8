#pragma once

#include <limits>
#include <sstream>
#include <vector>

#include "spintomo/measurement.hpp"

namespace spintomo {

// ---------------------------------------------------------------------------
// Orthonormal hermitean operator basis (generalized Gell-Mann + identity),
// first element I/sqrt(d).  Orthonormal under <A, B> = Tr(A B), so density
// matrix coordinates are real and the measurement map is a real matrix.
// ---------------------------------------------------------------------------

inline std::vector<CMatrix> hermitean_basis(SpinValue spin) {
  int d = spin.dimension();
  std::vector<CMatrix> basis;
  basis.reserve(d * d);
  basis.push_back(CMatrix::Identity(d, d) / std::sqrt(double(d)));
  // Diagonal (traceless) elements.
  for (int l = 1; l < d; ++l) {
    CMatrix b = CMatrix::Zero(d, d);
    for (int j = 0; j < l; ++j) b(j, j) = 1.0;
    b(l, l) = -double(l);
    basis.push_back(b / std::sqrt(double(l) * (l + 1)));
  }
  // Off-diagonal symmetric and antisymmetric pairs.
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      CMatrix sym = CMatrix::Zero(d, d);
      sym(j, k) = inv_sqrt2;
      sym(k, j) = inv_sqrt2;
      basis.push_back(sym);
      CMatrix asym = CMatrix::Zero(d, d);
      asym(j, k) = Complex(0, -inv_sqrt2);
      asym(k, j) = Complex(0, inv_sqrt2);
      basis.push_back(asym);
    }
  }
  return basis;
}

// Real coordinates of a hermitean matrix in the basis above.
inline RVector hermitean_coordinates(const CMatrix& m,
                                     const std::vector<CMatrix>& basis) {
  RVector c(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i)
    c[i] = (basis[i] * m).trace().real();
  return c;
}

inline CMatrix from_hermitean_coordinates(const RVector& c,
                                          const std::vector<CMatrix>& basis) {
  CMatrix m = CMatrix::Zero(basis[0].rows(), basis[0].cols());
  for (std::size_t i = 0; i < basis.size(); ++i) m += c[int(i)] * basis[i];
  return m;
}

// ---------------------------------------------------------------------------
// Measurement map.
// ---------------------------------------------------------------------------

// Real linear map from density-matrix coordinates to stacked probabilities.
// Rank uses a relative SVD threshold 1e-10 * sigma_max; the condition number
// refers to the restriction to the trace-one affine slice (identity
// coordinate eliminated).
struct MeasurementMap {
  SpinValue spin;
  QuorumSpec quorum;
  RMatrix matrix;  // (K*d) x d^2
  int rank = 0;
  double condition_number = std::numeric_limits<double>::infinity();

  MeasurementMap(SpinValue spin, QuorumSpec quorum)
      : spin(spin), quorum(std::move(quorum)) {}

  int parameter_count() const {
    int d = spin.dimension();
    return d * d;
  }
  int deficit() const { return parameter_count() - rank; }
  // Injectivity on the trace-one slice: full column rank of the traceless
  // block.  Because the identity column is orthogonal information (the
  // per-axis normalization), this coincides with rank == d^2.
  bool injective() const { return rank == parameter_count(); }

  RMatrix traceless_block() const {
    return matrix.rightCols(parameter_count() - 1);
  }
  RVector identity_column() const { return matrix.col(0); }
};

inline MeasurementMap build_map(SpinValue spin, const QuorumSpec& quorum) {
  if (quorum.size() == 0) throw InvalidArgument("build_map: empty quorum");
  int d = spin.dimension();
  std::vector<CMatrix> basis = hermitean_basis(spin);
  MeasurementMap map(spin, quorum);
  map.matrix.resize(quorum.size() * d, d * d);
  for (int k = 0; k < quorum.size(); ++k) {
    CMatrix u = rotation_to_axis(spin, quorum.axes[k]);
    for (int i = 0; i < d * d; ++i) {
      CVector diag = (u.adjoint() * basis[i] * u).diagonal();
      for (int m = 0; m < d; ++m) map.matrix(k * d + m, i) = diag[m].real();
    }
  }
  {
    Eigen::JacobiSVD<RMatrix> svd(map.matrix);
    RVector sv = svd.singularValues();
    double thresh = 1e-10 * sv[0];
    map.rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] > thresh) ++map.rank;
  }
  {
    Eigen::JacobiSVD<RMatrix> svd(map.traceless_block());
    RVector sv = svd.singularValues();
    double smin = sv[sv.size() - 1];
    map.condition_number = smin > 1e-10 * sv[0]
                               ? sv[0] / smin
                               : std::numeric_limits<double>::infinity();
  }
  return map;
}

// ---------------------------------------------------------------------------
// Reconstruction.
// ---------------------------------------------------------------------------

struct ReconResult {
  DensityMatrix rho_hat;
  double residual = 0.0;  // l2 misfit of predicted vs given probabilities,
                          // reported before any positivity projection
  bool injective = false;
  int rank = 0;
  double condition_number = 0.0;
  bool projected = false;  // positivity clipping was applied
};

struct ReconOptions {
  bool allow_minimum_norm = false;
  // Exact tables with residual above this raise InconsistentData.
  double exact_residual_tol = 1e-8;
};

// Minimum-residual hermitean solution with the trace fixed to 1: the
// identity coordinate is eliminated as a hard constraint and the traceless
// coordinates solved by orthogonal factorization.  Positivity is restored
// afterwards by eigenvalue clipping, only when violated beyond 1e-10.
inline ReconResult reconstruct_mixed(const IntensityTable& table,
                                     const QuorumSpec& quorum,
                                     const ReconOptions& opts = {}) {
  if (table.axis_count() != quorum.size())
    throw InvalidArgument("reconstruct_mixed: table axes do not match quorum");
  for (int k = 0; k < quorum.size(); ++k)
    if (table.axes[k].angle_to(quorum.axes[k]) > 1e-9)
      throw InvalidArgument("reconstruct_mixed: table axes do not match quorum");

  SpinValue spin = table.spin;
  int d = spin.dimension();
  MeasurementMap map = build_map(spin, quorum);
  std::vector<CMatrix> basis = hermitean_basis(spin);

  const double c0 = 1.0 / std::sqrt(double(d));  // identity coordinate
  RVector rhs = table.stacked() - map.identity_column() * c0;
  RMatrix a = map.traceless_block();

  RVector traceless;
  if (map.injective()) {
    traceless = a.colPivHouseholderQr().solve(rhs);
  } else if (opts.allow_minimum_norm) {
    Eigen::JacobiSVD<RMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    traceless = svd.solve(rhs);
  } else {
    std::ostringstream msg;
    msg << "measurement map not injective: rank " << map.rank << " of "
        << map.parameter_count() << " (null-space dimension " << map.deficit()
        << ")";
    throw NotInjective(map.rank, map.deficit(), msg.str());
  }

  double residual = (a * traceless - rhs).norm();
  if (table.provenance == Provenance::Exact &&
      residual > opts.exact_residual_tol)
    throw InconsistentData("reconstruct_mixed: exact table residual " +
                           std::to_string(residual) + " exceeds tolerance");

  RVector coords(d * d);
  coords[0] = c0;
  coords.tail(d * d - 1) = traceless;
  CMatrix rho = from_hermitean_coordinates(coords, basis);
  rho = 0.5 * (rho + rho.adjoint().eval());

  bool projected = false;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    projected = true;
    RVector ev = es.eigenvalues().cwiseMax(0.0);
    double tr = ev.sum();
    if (tr <= 0) throw InconsistentData("reconstruct_mixed: projected state has zero trace");
    ev /= tr;
    rho = es.eigenvectors() * ev.asDiagonal().toDenseMatrix().cast<Complex>() *
          es.eigenvectors().adjoint();
  } else {
    // Scrub round-off so the DensityMatrix invariants hold exactly enough.
    rho /= rho.trace().real();
  }

  ReconResult result{DensityMatrix(spin, rho), residual, map.injective(),
                     map.rank, map.condition_number, projected};
  return result;
}

// ---------------------------------------------------------------------------
// Quorum certification.
// ---------------------------------------------------------------------------

struct CertifyReport {
  SpinValue spin;
  QuorumSpec quorum;
  bool injective = false;
  int rank = 0;
  int deficit = 0;
  double condition_number = 0.0;
  std::string note;

  std::string to_text() const {
    std::ostringstream os;
    os << "spin 2s=" << spin.two_s() << " axes " << quorum.size()
       << " parameters " << spin.dimension() * spin.dimension() << "\n"
       << "rank " << rank << "\n"
       << "deficit " << deficit << "\n"
       << "injective " << (injective ? "yes" : "no") << "\n"
       << "condition-number " << condition_number << "\n";
    if (!note.empty()) os << "note " << note << "\n";
    return os.str();
  }
};

// Rank of the map for K axes in generic position: the intensities along one
// axis determine the moments <(n.S)^j>, j = 1..2s, and the j-th moment is a
// single evaluation of the rank-j multipole form (2j+1 unknowns).  Hence
// rank = 1 + sum_j min(K, 2j+1), and full rank needs K >= 4s+1.
inline int generic_axis_rank(SpinValue spin, int axis_count) {
  int rank = 1;
  for (int j = 1; j <= spin.two_s(); ++j)
    rank += std::min(axis_count, 2 * j + 1);
  return std::min(rank, spin.dimension() * spin.dimension());
}

inline CertifyReport certify_quorum(SpinValue spin, const QuorumSpec& quorum) {
  MeasurementMap map = build_map(spin, quorum);
  CertifyReport report{spin, quorum, map.injective(), map.rank, map.deficit(),
                       map.condition_number, ""};
  if (report.deficit > 0) {
    std::ostringstream os;
    os << "rank-deficient map: rank " << report.rank << " of "
       << spin.dimension() * spin.dimension()
       << "; generic-axis moment counting predicts rank "
       << generic_axis_rank(spin, quorum.size())
       << " for K = " << quorum.size()
       << " axes and requires K >= 4s+1 = " << 2 * spin.two_s() + 1
       << " for injectivity";
    report.note = os.str();
  }
  return report;
}

// ---------------------------------------------------------------------------
// Axis design.
// ---------------------------------------------------------------------------

enum class DesignStrategy { ConeScan, RandomFrames };

struct DesignResult {
  QuorumSpec quorum;
  double condition_number = 0.0;
};

namespace detail {

inline double cone_condition(SpinValue spin, int count, double theta,
                             bool staggered) {
  QuorumSpec q = staggered ? generic_cone_axes(spin, count, theta)
                           : cone_axes(spin, count, theta);
  MeasurementMap map = build_map(spin, q);
  return map.injective() ? map.condition_number
                         : std::numeric_limits<double>::infinity();
}

}  // namespace detail

// Cone-scan sweeps theta over a grid in (0, pi/2], keeps the injective
// configuration of minimal condition number (ties to smaller theta), and
// polishes the winner with a golden-section refinement.  Random-frames draws
// seeded random axis sets and keeps the best.
inline DesignResult design_axes(SpinValue spin, int count,
                                DesignStrategy strategy,
                                int grid_points = 89,
                                std::uint64_t seed = 0,
                                int random_draws = 64) {
  if (count < 1) throw InvalidArgument("design_axes: K must be >= 1");
  if (strategy == DesignStrategy::ConeScan) {
    // Equal azimuths conditioned better when injective; staggered azimuths
    // rescue the aliased counts (K <= 4s).  Scan both, prefer equal on ties.
    double best_theta = -1.0;
    double best_cond = std::numeric_limits<double>::infinity();
    bool best_staggered = false;
    for (bool staggered : {false, true}) {
      for (int j = 1; j <= grid_points; ++j) {
        double theta = (kPi / 2) * double(j) / double(grid_points);
        double cond = detail::cone_condition(spin, count, theta, staggered);
        if (cond < best_cond) {
          best_cond = cond;
          best_theta = theta;
          best_staggered = staggered;
        }
      }
    }
    if (!std::isfinite(best_cond))
      throw NoInjectiveConfiguration(
          "design_axes: no injective cone found for K = " +
          std::to_string(count));
    // Golden-section polish between the grid neighbours of the winner.
    double step = (kPi / 2) / double(grid_points);
    double lo = std::max(best_theta - step, step * 1e-6);
    double hi = std::min(best_theta + step, kPi / 2);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = detail::cone_condition(spin, count, x1, best_staggered);
    double f2 = detail::cone_condition(spin, count, x2, best_staggered);
    for (int it = 0; it < 60 && (b - a) > 1e-10; ++it) {
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = detail::cone_condition(spin, count, x1, best_staggered);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = detail::cone_condition(spin, count, x2, best_staggered);
      }
    }
    double theta = f1 <= f2 ? x1 : x2;
    double cond = detail::cone_condition(spin, count, theta, best_staggered);
    if (cond <= best_cond) {
      best_cond = cond;
      best_theta = theta;
    }
    QuorumSpec quorum = best_staggered
                            ? generic_cone_axes(spin, count, best_theta)
                            : cone_axes(spin, count, best_theta);
    return DesignResult{std::move(quorum), best_cond};
  }

  // Random frames.
  double best_cond = std::numeric_limits<double>::infinity();
  QuorumSpec best;
  for (int draw = 0; draw < random_draws; ++draw) {
    Rng rng(derive_seed(seed, std::uint64_t(draw)));
    std::vector<Axis> axes;
    for (int k = 0; k < count; ++k) {
      double z = 2.0 * rng.uniform() - 1.0;
      double phi = 2.0 * kPi * rng.uniform();
      axes.emplace_back(std::acos(z), phi);
    }
    QuorumSpec q = explicit_quorum(axes);
    MeasurementMap map = build_map(spin, q);
    if (map.injective() && map.condition_number < best_cond) {
      best_cond = map.condition_number;
      best = q;
    }
  }
  if (!std::isfinite(best_cond))
    throw NoInjectiveConfiguration(
        "design_axes: no injective random frame found for K = " +
        std::to_string(count));
  return DesignResult{best, best_cond};
}

}  // namespace spintomo
