#pragma once

// All numeric tolerances used across the library, collected in one place.
// Values are part of the documented behavior of the operations that use them.

namespace quadpid {
namespace tol {

// eigenvalues(): relative accuracy for well-conditioned inputs.
inline constexpr double kEigRel = 1e-9;

// solve_lyapunov(): residual bound is kLyapResidualRel * (|a|*|P| + |q|)
// in Frobenius norms. The raw linear solve leaves an antisymmetric noise
// component that grows with the stiffness of the equation; it is held to
// the same bound as the residual, then removed by symmetrization (the
// exact solution is symmetric).
inline constexpr double kLyapResidualRel = 1e-9;

// solve_care(): relative residual bound (Frobenius, against the sum of the
// equation's term norms) and iteration cap for the Newton recursion.
inline constexpr double kCareResidualRel = 1e-8;
inline constexpr int kCareMaxIterations = 60;

// expm(): relative accuracy on norm-bounded inputs.
inline constexpr double kExpmRel = 1e-10;

// Symmetry / positive-definiteness slack used when validating weight
// matrices, relative to the matrix scale.
inline constexpr double kSymmetryRel = 1e-10;
inline constexpr double kPsdSlackRel = 1e-9;

// LMI certificates. The quadratic-cost certificate sits exactly on the
// boundary at the optimum, so feasibility there allows a small positive
// slack; the norm-bound certificate is strict with margin kLmiMargin*scale.
inline constexpr double kLmiBoundarySlack = 1e-6;
inline constexpr double kLmiMargin = 1e-9;
// Strictness inflation used when constructing certificate witnesses.
inline constexpr double kLmiWitnessEps = 1e-8;
inline constexpr double kLmiSchurEps = 1e-6;

// PID extraction: least-squares residual above this (relative to |M|)
// records a warning in the result metadata.
inline constexpr double kPidResidualWarnRel = 1e-9;
// Round-trip identity tolerance on the square (2-state) plant.
inline constexpr double kPidRoundTrip = 1e-9;

// Simulation.
inline constexpr double kDivergenceLimit = 1e9;   // |state| beyond this aborts
inline constexpr double kRk4ConvergenceRel = 1e-6; // dt vs dt/2 agreement
inline constexpr double kSettleBandFrac = 0.02;   // +/-2% settling band
inline constexpr double kStepRiseLow = 0.1;       // 10% of final value
inline constexpr double kStepRiseHigh = 0.9;      // 90% of final value

// H2 norm cross-check accuracy (Gramian vs impulse-response quadrature).
inline constexpr double kH2OracleRel = 1e-4;

}  // namespace tol
}  // namespace quadpid
