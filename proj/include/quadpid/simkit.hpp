#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadpid/models.hpp"
#include "quadpid/pidtune.hpp"

namespace quadpid {

// Thrown when a simulated state leaves the divergence guard band; carries
// the first time the bound was exceeded.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double t_first)
      : std::runtime_error(what), t_first_(t_first) {}
  double t_first() const { return t_first_; }

 private:
  double t_first_;
};

// Low-altitude vertical-channel turbulence settings. sigma_w = 0.1 * W20 and
// L_w = h per the usual low-altitude forms; dt is the sample step of the
// driving noise.
struct DrydenConfig {
  double mean_wind_w20 = 5.0;  // m/s, mean wind at 20 ft
  double airspeed_v = 5.0;     // m/s
  double altitude_h = 10.0;    // m
  double dt = 0.001;           // s, <= 0.01
  std::uint64_t seed = 42;
};

// Turbulence intensity implied by the config.
inline double dryden_sigma_w(const DrydenConfig& cfg) {
  return 0.1 * cfg.mean_wind_w20;
}

// Two-state shaping filter realizing
//   H_w(s) = sigma_w sqrt(L_w/(pi V)) (1 + sqrt(3) tau s) / (1 + tau s)^2,
// tau = L_w / V, in companion form (noise input in b_u, wind speed out of c).
// Driven by unit-variance draws at 1/dt it reproduces the stationary
// standard deviation sigma_w. Throws std::invalid_argument on non-positive
// fields or dt > 0.01.
StateSpaceModel dryden_vertical_filter(const DrydenConfig& cfg);

// Deterministic wind series (m/s): SplitMix64 in counter mode seeds
// Box-Muller normal draws, scaled by sqrt(pi/dt) to approximate the
// continuous unit-PSD noise the filter expects, then passed through the
// zero-order-hold discretization of the filter at step dt. Same
// (filter, seed, n_steps, dt) always yields the identical series.
std::vector<double> generate_wind(const StateSpaceModel& filter,
                                  std::uint64_t seed, std::size_t n_steps,
                                  double dt);

// One simulated run. x holds one state row per sample (closed-loop state
// [plant; integrator]); all series share the same length and a uniform
// time step.
struct SimTrajectory {
  std::vector<double> t;  // s
  Matrix x;               // samples x states
  std::vector<double> y;  // plant output
  std::vector<double> u;  // control input, PPM (trim included if configured)
  std::vector<double> w;  // disturbance, m/s
  std::vector<double> r;  // reference
};

struct SimOptions {
  PidLoopOptions loop;
  // Constant offset added to the reported input series only (the hover
  // operating point the deviation model is written around); the dynamics
  // are unaffected.
  double input_trim_ppm = 0.0;
};

// Integrates the PID closed loop with fixed-step RK4: reference step r_step
// at t = 0 and the wind series entering zero-order-hold through b_w. wind
// must supply at least T/dt samples; sample k of the output series reports
// wind[k] (0 past the end of the series). Throws std::runtime_error with
// the first divergence time if any |state| exceeds 1e9.
SimTrajectory simulate_step(const StateSpaceModel& sys, const PidGains& g,
                            const std::vector<double>& wind, double r_step,
                            double dt, double t_final,
                            const SimOptions& opt = {});

// Mean and unbiased sample variance of the control input over the full
// horizon.
struct InputStats {
  double mean = 0.0;      // PPM
  double variance = 0.0;  // PPM^2
};

InputStats input_stats(const SimTrajectory& traj);

// Step-response quality; times are sample-aligned (resolution dt).
// settling_time_s and rise_time_s are +infinity when the trajectory never
// reaches the band / the 90% level within the horizon.
struct StepMetrics {
  double rise_time_s = 0.0;      // 10% -> 90% of the final value
  double overshoot_pct = 0.0;    // peak beyond the reference, % of |r|
  double settling_time_s = 0.0;  // entry into the +/-2% band around r
};

// Throws std::invalid_argument on an empty trajectory or zero reference.
StepMetrics step_metrics(const SimTrajectory& traj);

}  // namespace quadpid
