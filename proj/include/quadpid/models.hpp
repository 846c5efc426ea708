#pragma once

#include <array>
#include <string>
#include <vector>

#include "quadpid/lincore.hpp"

namespace quadpid {

// Linear model  x' = a x + b_u u + b_w w,  y = c x.
struct StateSpaceModel {
  Matrix a;    // n x n
  Matrix b_u;  // n x r, control input (PPM)
  Matrix b_w;  // n x p, disturbance input
  Matrix c;    // l x n
  std::vector<std::string> state_labels;
  std::string input_unit = "PPM";
  std::string disturbance_unit = "m/s^2";

  Eigen::Index n() const { return a.rows(); }
  Eigen::Index num_inputs() const { return b_u.cols(); }
  Eigen::Index num_outputs() const { return c.rows(); }
};

// Throws std::invalid_argument if the block dimensions are inconsistent or
// any entry is non-finite.
void validate_dimensions(const StateSpaceModel& sys);

// c (sI - a)^-1 b_u evaluated at a complex frequency.
Eigen::MatrixXcd transfer_at(const StateSpaceModel& sys,
                             std::complex<double> s);

// Physical constants of the vertical channel.
struct QuadVerticalParams {
  double thrust_coeff_b = 1.5108e-5;  // kg*m
  double mass_m = 1.07;               // kg
  // Chosen so the velocity-row coupling 2*hover_speed*b/m equals 0.0106.
  double hover_speed = 0.0106 * 1.07 / (2.0 * 1.5108e-5);  // rad/s
  double motor_pole = 10.0;   // 1/s
  double motor_gain = 7.0;    // rad/s per PPM
  double drag_coeff_d = 1e-6; // kg*m^2, mixer only
};

// Gain of the reduced vertical channel: 4 rotors x coupling 0.0106 x motor
// gain 7. The reduced builders below are fixed numeric realizations.
inline constexpr double kChannelGain = 0.2968;

// Hover input offset implied by the reduced model: the constant PPM input
// whose steady acceleration output cancels gravity,
// g * motor_pole / kChannelGain.
inline constexpr double kGravity = 9.81;
inline constexpr double kHoverTrimPpm = kGravity * 10.0 / kChannelGain;

// Six-state vertical model: states (z, v, rotor speeds 1..4). The velocity
// row couples to the rotors with alternating sign 2*hover_speed*b/m; each
// rotor is a first-order lag -motor_pole with input gain +/-motor_gain.
StateSpaceModel build_vertical_full(const QuadVerticalParams& p);

// Two-state minimal realization of the velocity channel
// u -> y = -0.2968 / (s (s + 10)), disturbance entering the velocity state
// with the inverse output scaling (so w maps to y through -1/s).
StateSpaceModel build_velocity_plant();

// Three-state realization of the position channel
// u -> y = -0.2968 / (s^2 (s + 10)): the velocity realization cascaded with
// an output integrator, keeping the disturbance on the velocity state.
StateSpaceModel build_position_plant();

// Base system plus its integral-augmented copy (state [x; zeta]).
struct AugmentedModel {
  StateSpaceModel base;
  StateSpaceModel aug;
};

// Appends integrator states zeta' = zeta_row_scale * C x. The default scale
// 1.0 integrates the output itself; other scales are retained for
// cross-checking alternative published realizations of the same loop.
AugmentedModel augment_with_integrator(const StateSpaceModel& sys,
                                       double zeta_row_scale = 1.0);

struct RotorCommand {
  std::array<double, 4> omega;  // rad/s, all >= 0
};

// Thrust/moment combinations of the four rotors:
//   U1 = b sum(omega_i^2), U2 = b (omega2^2 - omega4^2),
//   U3 = b (omega1^2 - omega3^2), U4 = d (o1^2 - o2^2 + o3^2 - o4^2).
std::array<double, 4> rotor_mixer(const RotorCommand& cmd,
                                  const QuadVerticalParams& p);

}  // namespace quadpid
