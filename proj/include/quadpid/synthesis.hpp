#pragma once

#include <string>
#include <utility>
#include <vector>

#include "quadpid/models.hpp"

namespace quadpid {

// How the scalar input weight enters the performance output.
//   WEIGHTED_CHANNEL: z = [c_z x ; w_u * u]   (stacked channel, no cross term)
//   SCALED_DU:        z = c_z x + w_u * u     (single channel, cross term)
enum class WuMode { WEIGHTED_CHANNEL, SCALED_DU };

// Performance output z = C_z x + D_u u, constructed from a state row and a
// scalar input weight according to the mode above. c_z / d_u are the
// effective (stacked) matrices actually used in synthesis.
struct PerformanceSpec {
  Matrix c_z;          // m x n effective
  Matrix d_u;          // m x r effective
  double input_weight; // w_u as given
  WuMode mode;

  // Builds the effective matrices. state_rows is the raw weighting row(s)
  // on the (augmented) state; w_u must be > 0 so d_u'd_u is positive
  // definite in either mode.
  static PerformanceSpec make(const Matrix& state_rows, double w_u,
                              WuMode mode, Eigen::Index num_inputs = 1);

  // Quadratic weights of the equivalent state-feedback problem:
  // q = C_z'C_z, r = D_u'D_u, s = C_z'D_u.
  Matrix q() const { return c_z.transpose() * c_z; }
  Matrix r() const { return d_u.transpose() * d_u; }
  Matrix s() const { return c_z.transpose() * d_u; }
};

// State feedback u = -k x.
struct FeedbackGain {
  Matrix k;  // r x n
};

// Quadratic-cost (boundary) feedback certificate and norm-bound certificate
// results. residual_blocks lists (name, max eigenvalue) per matrix block;
// NORM_BOUND feasibility requires every block strictly negative beyond its
// margin (see certify_h2_lmi), while the QUADRATIC_COST certificate sits on
// the boundary at the optimum and allows max eigenvalue <= 1e-6 * scale.
enum class CertificateKind { QUADRATIC_COST, NORM_BOUND };

struct LmiCertificate {
  CertificateKind which;
  std::vector<std::pair<std::string, double>> residual_blocks;
  double gamma = 0.0;  // NORM_BOUND only
  bool feasible = false;
  std::string diagnostic;  // non-empty when infeasibility has a named cause
};

// Optimal state feedback for cost integral(x'qx + u'ru): solves the Riccati
// equation on (sys.a, sys.b_u) and returns k = r^-1 b'P. The result is
// validated (residual < 1e-8 relative, closed loop Hurwitz) before return.
FeedbackGain lqr_gain(const StateSpaceModel& sys, const Matrix& q,
                      const Matrix& r);

// Feedback minimizing the closed-loop w -> z norm for the given performance
// output: k = (d'd)^-1 (b'P + d'c) with P from the cross-term Riccati
// equation solve_care(a, b_u, c'c, d'd, c'd).
FeedbackGain h2_gain(const StateSpaceModel& sys, const PerformanceSpec& perf);

// Closed loop under u = -kx: x' = (a - b_u k)x + b_w w, z = (c_z - d_u k)x.
// The returned model keeps b_u so that k = 0 returns the open loop with the
// performance output attached.
StateSpaceModel close_loop(const StateSpaceModel& sys,
                           const PerformanceSpec& perf,
                           const FeedbackGain& k);

// H2 norm of a Hurwitz system (w -> y channel, no feedthrough):
// sqrt(trace(b_w' Q_o b_w)) with A'Q_o + Q_o A + C'C = 0.
double h2_norm(const StateSpaceModel& cl);

// Certifies that k is the quadratic-cost optimum for (sys, q, r) by the
// inverse-solution witness: Y = P^-1, W = -kY, and the matrix
// A Y + Y A' + W' B_u' + B_u W + Y q Y + W' r W must be (numerically)
// negative semidefinite; at the optimum it is exactly the zero matrix, so
// feasibility allows max eigenvalue <= 1e-6 * scale.
LmiCertificate certify_lqr_lmi(const StateSpaceModel& sys, const Matrix& q,
                               const Matrix& r, const FeedbackGain& k);

// Certifies |G_zw|_2 < gamma for the closed loop under k, by constructing a
// strictly feasible witness from the controllability Gramian:
//   X from (a - b_u k) X + X (a - b_u k)' + b_w b_w' + eps I = 0,
//   Z = (c_z - d_u k) X (c_z - d_u k)' + eps' I.
// residual_blocks reports max eigenvalues of the Gramian block, the two
// Schur-complement halves of the output block (-X and CXC' - Z), and the
// trace gap trace(Z) - gamma^2; feasible iff all are negative beyond their
// stated margins.
LmiCertificate certify_h2_lmi(const StateSpaceModel& sys,
                              const PerformanceSpec& perf,
                              const FeedbackGain& k, double gamma);

}  // namespace quadpid
