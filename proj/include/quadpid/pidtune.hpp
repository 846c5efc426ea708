#pragma once

#include "quadpid/models.hpp"
#include "quadpid/synthesis.hpp"

namespace quadpid {

// Scalar PID gains for a single-output loop. No sign constraint: the
// vertical-channel gain is negative, so tuned gains come out negative.
struct PidGains {
  double k_p = 0.0;
  double k_i = 0.0;
  double k_d = 0.0;
};

// Resolved state-space form of the PID law u = -K_P y - K_I zeta - K_D y',
// with y' eliminated through the plant equations:
//   u = -M x - N w - L zeta,
//   M = (I + K_D C B_u)^-1 (K_P C + K_D C A),
//   N = (I + K_D C B_u)^-1 K_D C B_w,
//   L = (I + K_D C B_u)^-1 K_I.
// inv_factor stores (I + K_D C B_u)^-1 itself.
struct MnlMatrices {
  Matrix m;           // r x n
  Matrix n;           // r x p
  Matrix l;           // r x l
  Matrix inv_factor;  // r x r
};

// PID gains recovered from an augmented-state feedback gain, together with
// the extraction quality: ls_residual is |[K_P K_D] S - M| / |M| for the
// stacked matrix S = [C; CA - CB_u M] (zero when S is square and invertible),
// and residual_warning marks residuals above the documented threshold.
struct PidExtraction {
  PidGains gains;
  double ls_residual = 0.0;
  bool residual_warning = false;
};

// Computes M, N, L (and the inverse factor) for the given gains on the base
// system. Throws std::runtime_error naming the offending scalar when
// I + K_D C B_u is singular.
MnlMatrices extract_mnl(const PidGains& g, const StateSpaceModel& sys);

// Inverts the comparison: partitions an augmented-state gain k = (K1 | K2)
// into M = K1 and L = K2, recovers [K_P K_D] = M * pinv([C; CA - CB_u M])
// (exact inverse for 2-state plants, minimum-norm least squares otherwise,
// residual surfaced in the result), then K_I = (I + K_D C B_u) L.
// Throws std::runtime_error with a rank report when the stacked matrix loses
// row rank.
PidExtraction pid_from_state_gain(const FeedbackGain& k_aug,
                                  const StateSpaceModel& sys);

// How the loop is wired for tracking.
struct PidLoopOptions {
  // Feed the resolved N term back from the disturbance input. Off by
  // default: the disturbance is unmeasurable in flight, so N is reported
  // but not acted on.
  bool feed_forward_wind = false;
  // Apply the proportional term to the tracking error instead of the raw
  // measurement. Off by default (I-on-error, PD-on-measurement), which
  // avoids reference kick.
  bool error_side_p = false;
};

// Closed loop of plant + PID on the augmented state [x; zeta], where
// zeta' = y - r. Inputs of the returned model: b_u column is the reference
// r, b_w is the disturbance; output is the plant output. With zero gains
// this is the open augmented loop.
StateSpaceModel pid_closed_loop(const StateSpaceModel& sys, const PidGains& g,
                                const PidLoopOptions& opt = {});

}  // namespace quadpid
