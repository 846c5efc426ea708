#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace quadpid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// All eigenvalues of a square matrix (with multiplicity), unordered.
// Throws std::invalid_argument on non-square or non-finite input and
// std::runtime_error if the QR iteration fails to converge.
std::vector<std::complex<double>> eigenvalues(const Matrix& m);

// Largest eigenvalue real part. Convenience for stability checks.
double spectral_abscissa(const Matrix& m);

// True iff every eigenvalue of m has real part < 0.
bool is_hurwitz(const Matrix& m);

// Solves a'P + Pa + q = 0 for symmetric P, with a Hurwitz and q symmetric.
// Direct dense solve of the Kronecker-vectorized system (sized for n <= 8).
// The result satisfies |a'P + Pa + q|_F < 1e-9 * (|a|_F |P|_F + |q|_F) and is
// symmetrized to machine precision; violations throw std::runtime_error.
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

// Solves the continuous algebraic Riccati equation
//   a'P + Pa - (Pb + s) r^-1 (b'P + s') + q = 0
// for the stabilizing P >= 0 (i.e. a - b r^-1 (b'P + s') is Hurwitz).
// r must be symmetric positive definite, (a, b) stabilizable, and
// q - s r^-1 s' positive semidefinite.
//
// Algorithm: the cross term is folded away (a~ = a - b r^-1 s',
// q~ = q - s r^-1 s'), an initial stabilizing gain is found by a shifted
// Lyapunov solve (Bass construction: (a~+bI)W + W(a~+bI)' = 2 bb',
// K0 = b' W^-1 with shift b above the spectral abscissa), and the solution is
// refined by the Newton recursion, each step one Lyapunov solve. The returned
// P is validated by substitution: relative residual < 1e-8 or
// std::runtime_error is thrown with the residual attached.
Matrix solve_care(const Matrix& a, const Matrix& b, const Matrix& q,
                  const Matrix& r, const Matrix& s);

// solve_care with zero cross term.
Matrix solve_care(const Matrix& a, const Matrix& b, const Matrix& q,
                  const Matrix& r);

// exp(m*t) by scaling-and-squaring (Pade), relative accuracy ~1e-10 on
// norm-bounded inputs.
Matrix expm(const Matrix& m, double t);

}  // namespace quadpid
