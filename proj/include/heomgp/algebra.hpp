// algebra.hpp: 2x2 complex matrix aliases, Pauli operators, commutators,
// and a closed-form Hermitian eigensolver used by every other layer.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace heomgp {

using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;
using cplx = std::complex<double>;

inline constexpr cplx I_UNIT{0.0, 1.0};

// Base for all domain errors; the CLI maps concrete types to exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonHermitianInput : Error {
  using Error::Error;
};

namespace algebra {

inline Mat2 identity() { return Mat2::Identity(); }

inline Mat2 sigma_x() {
  Mat2 m;
  m << 0, 1, 1, 0;
  return m;
}

inline Mat2 sigma_y() {
  Mat2 m;
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}

inline Mat2 sigma_z() {
  Mat2 m;
  m << 1, 0, 0, -1;
  return m;
}

// Raising/lowering in the {|0> excited, |1> ground} basis: sigma_plus |1> = |0>.
inline Mat2 sigma_plus() {
  Mat2 m;
  m << 0, 1, 0, 0;
  return m;
}

inline Mat2 sigma_minus() {
  Mat2 m;
  m << 0, 0, 1, 0;
  return m;
}

// sigma_plus * sigma_minus = diag(1, 0): projector on the excited level.
inline Mat2 excited_projector() {
  Mat2 m;
  m << 1, 0, 0, 0;
  return m;
}

inline Mat2 commutator(const Mat2& a, const Mat2& b) { return a * b - b * a; }

inline Mat2 anticommutator(const Mat2& a, const Mat2& b) { return a * b + b * a; }

inline Mat2 hermitize(const Mat2& m) { return 0.5 * (m + m.adjoint()); }

inline double hermiticity_defect(const Mat2& m) { return (m - m.adjoint()).norm(); }

// Eigendecomposition of a Hermitian 2x2, eigenvalues sorted descending.
// Closed form on trace/determinant; the eigenvector formula is branched on
// the sign of the diagonal gap so the well-conditioned expression is used
// when the matrix is nearly diagonal.
struct EigenPair2 {
  double eps1 = 0.0;  // larger eigenvalue
  double eps2 = 0.0;
  Vec2 v1;
  Vec2 v2;
  bool degenerate = false;  // |eps1 - eps2| below the degeneracy tolerance
};

inline constexpr double kHermTol = 1e-9;
inline constexpr double kDegenTol = 1e-10;

inline EigenPair2 eig_hermitian(const Mat2& m_in) {
  if (hermiticity_defect(m_in) > kHermTol) {
    throw NonHermitianInput("eig_hermitian: input exceeds Hermiticity tolerance");
  }
  const Mat2 m = hermitize(m_in);
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const cplx b = m(0, 1);
  const double diff = a - d;
  const double disc = std::hypot(diff, 2.0 * std::abs(b));

  EigenPair2 out;
  out.eps1 = 0.5 * ((a + d) + disc);
  out.eps2 = 0.5 * ((a + d) - disc);
  out.degenerate = disc < kDegenTol;

  Vec2 v;
  if (diff >= 0.0) {
    v << cplx(out.eps1 - d, 0.0), std::conj(b);
  } else {
    v << b, cplx(out.eps1 - a, 0.0);
  }
  const double n = v.norm();
  if (n == 0.0) {
    // exactly degenerate (scalar matrix): any orthonormal basis serves
    v << 1, 0;
  } else {
    v /= n;
  }
  out.v1 = v;
  out.v2 << -std::conj(v(1)), std::conj(v(0));
  return out;
}

}  // namespace algebra
}  // namespace heomgp
