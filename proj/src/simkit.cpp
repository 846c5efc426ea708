#include "quadpid/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "quadpid/tolerances.hpp"

namespace quadpid {

namespace {

constexpr double kPi = 3.14159265358979323846;

void validate_config(const DrydenConfig& cfg) {
  if (!(cfg.mean_wind_w20 > 0.0) || !(cfg.airspeed_v > 0.0) ||
      !(cfg.altitude_h > 0.0) || !(cfg.dt > 0.0)) {
    throw std::invalid_argument("turbulence settings must be positive");
  }
  if (cfg.dt > 0.01) {
    throw std::invalid_argument("noise sample step must be <= 0.01 s");
  }
}

// Counter-mode SplitMix64: the i-th draw depends only on (seed, i).
inline std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t z = seed + (i + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Top 53 bits mapped to (0, 1]; never 0, so log() below is safe.
inline double to_unit_interval(std::uint64_t x) {
  return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

// Standard normal draws via Box-Muller on consecutive counter pairs.
std::vector<double> normal_draws(std::uint64_t seed, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; i += 2) {
    const double u1 = to_unit_interval(splitmix64_at(seed, i));
    const double u2 = to_unit_interval(splitmix64_at(seed, i + 1));
    const double radius = std::sqrt(-2.0 * std::log(u1));
    out[i] = radius * std::cos(2.0 * kPi * u2);
    if (i + 1 < n) out[i + 1] = radius * std::sin(2.0 * kPi * u2);
  }
  return out;
}

}  // namespace

StateSpaceModel dryden_vertical_filter(const DrydenConfig& cfg) {
  validate_config(cfg);
  const double sigma = dryden_sigma_w(cfg);
  const double l_w = cfg.altitude_h;
  const double tau = l_w / cfg.airspeed_v;
  const double gain = sigma * std::sqrt(l_w / (kPi * cfg.airspeed_v));
  StateSpaceModel filter;
  filter.a = Matrix{{-2.0 / tau, -1.0 / (tau * tau)}, {1.0, 0.0}};
  filter.b_u = Matrix{{1.0}, {0.0}};
  filter.b_w = Matrix::Zero(2, 1);
  filter.c = Matrix{{gain * std::sqrt(3.0) / tau, gain / (tau * tau)}};
  filter.state_labels = {"gust1", "gust2"};
  filter.input_unit = "unit-variance draws";
  filter.disturbance_unit = "none";
  return filter;
}

std::vector<double> generate_wind(const StateSpaceModel& filter,
                                  std::uint64_t seed, std::size_t n_steps,
                                  double dt) {
  validate_dimensions(filter);
  if (n_steps == 0) throw std::invalid_argument("n_steps must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  const Eigen::Index n = filter.n();

  // Zero-order-hold discretization via the augmented exponential
  // [[A, B], [0, 0]] -> [[Ad, Bd], [0, I]].
  Matrix block = Matrix::Zero(n + 1, n + 1);
  block.topLeftCorner(n, n) = filter.a;
  block.topRightCorner(n, 1) = filter.b_u;
  const Matrix disc = expm(block, dt);
  const Matrix a_d = disc.topLeftCorner(n, n);
  const Matrix b_d = disc.topRightCorner(n, 1);

  // sqrt(pi/dt) turns unit-variance samples at rate 1/dt into the
  // band-limited approximation of the unit-PSD noise the filter gain
  // normalization assumes.
  const double noise_scale = std::sqrt(kPi / dt);
  const std::vector<double> draws = normal_draws(seed, n_steps);

  std::vector<double> wind(n_steps);
  Vector x = Vector::Zero(n);
  for (std::size_t k = 0; k < n_steps; ++k) {
    wind[k] = (filter.c * x)(0, 0);
    x = a_d * x + b_d * (noise_scale * draws[k]);
  }
  return wind;
}

SimTrajectory simulate_step(const StateSpaceModel& sys, const PidGains& g,
                            const std::vector<double>& wind, double r_step,
                            double dt, double t_final, const SimOptions& opt) {
  if (!(dt > 0.0) || !(t_final > 0.0)) {
    throw std::invalid_argument("dt and horizon must be positive");
  }
  const auto n_steps = static_cast<std::size_t>(std::llround(t_final / dt));
  if (wind.size() < n_steps) {
    std::ostringstream os;
    os << "wind series has " << wind.size() << " samples, need " << n_steps;
    throw std::invalid_argument(os.str());
  }
  const StateSpaceModel cl = pid_closed_loop(sys, g, opt.loop);
  const MnlMatrices mnl = extract_mnl(g, sys);
  const Eigen::Index n = sys.n();
  const Eigen::Index nc = cl.n();

  // u = -M x - L zeta (+ inv K_P r on the error side, - N w when fed).
  Matrix gain_row(1, nc);
  gain_row.leftCols(n) = mnl.m;
  gain_row.rightCols(1) = mnl.l;
  const double u_ref =
      opt.loop.error_side_p ? mnl.inv_factor(0, 0) * g.k_p * r_step : 0.0;

  SimTrajectory traj;
  traj.t.resize(n_steps + 1);
  traj.x.resize(n_steps + 1, nc);
  traj.y.resize(n_steps + 1);
  traj.u.resize(n_steps + 1);
  traj.w.resize(n_steps + 1);
  traj.r.resize(n_steps + 1);

  Vector x = Vector::Zero(nc);
  const Vector b_r = cl.b_u.col(0);
  const Vector b_w = cl.b_w.col(0);
  for (std::size_t k = 0; k <= n_steps; ++k) {
    const double w_k = k < wind.size() ? wind[k] : 0.0;
    traj.t[k] = static_cast<double>(k) * dt;
    traj.x.row(k) = x.transpose();
    traj.y[k] = (cl.c * x)(0, 0);
    double u_k = -(gain_row * x)(0, 0) + u_ref;
    if (opt.loop.feed_forward_wind) u_k -= mnl.n(0, 0) * w_k;
    traj.u[k] = u_k + opt.input_trim_ppm;
    traj.w[k] = w_k;
    traj.r[k] = r_step;
    if (k == n_steps) break;

    // One RK4 step with the exogenous inputs held over [t_k, t_k + dt].
    const Vector forcing = b_w * w_k + b_r * r_step;
    const Vector k1 = cl.a * x + forcing;
    const Vector k2 = cl.a * (x + 0.5 * dt * k1) + forcing;
    const Vector k3 = cl.a * (x + 0.5 * dt * k2) + forcing;
    const Vector k4 = cl.a * (x + dt * k3) + forcing;
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > tol::kDivergenceLimit) {
      const double t_first = static_cast<double>(k + 1) * dt;
      std::ostringstream os;
      os << "simulation diverged at t = " << t_first
         << " s (|state| exceeded " << tol::kDivergenceLimit << ")";
      throw DivergenceError(os.str(), t_first);
    }
  }
  return traj;
}

InputStats input_stats(const SimTrajectory& traj) {
  const std::size_t n = traj.u.size();
  if (n == 0) throw std::invalid_argument("empty input series");
  InputStats stats;
  double sum = 0.0;
  for (double v : traj.u) sum += v;
  stats.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : traj.u) ss += (v - stats.mean) * (v - stats.mean);
    stats.variance = ss / static_cast<double>(n - 1);
  }
  return stats;
}

StepMetrics step_metrics(const SimTrajectory& traj) {
  const std::size_t n = traj.y.size();
  if (n == 0 || traj.r.empty()) {
    throw std::invalid_argument("empty trajectory");
  }
  const double r = traj.r.back();
  if (r == 0.0) {
    throw std::invalid_argument("step metrics need a nonzero reference");
  }
  const double sign = r > 0.0 ? 1.0 : -1.0;
  const double y_final = traj.y.back();

  StepMetrics m;
  const double inf = std::numeric_limits<double>::infinity();

  // Rise: first crossings of 10% / 90% of the final value, in the step
  // direction.
  const double lo = tol::kStepRiseLow * y_final * sign;
  const double hi = tol::kStepRiseHigh * y_final * sign;
  double t10 = inf, t90 = inf;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = sign * traj.y[k];
    if (t10 == inf && v >= lo) t10 = traj.t[k];
    if (v >= hi) {
      t90 = traj.t[k];
      break;
    }
  }
  m.rise_time_s = (t90 == inf || t10 == inf) ? inf : t90 - t10;

  // Overshoot beyond the reference, as a percentage of |r|.
  double peak = 0.0;
  for (double v : traj.y) peak = std::max(peak, sign * (v - r));
  m.overshoot_pct = 100.0 * peak / std::abs(r);

  // Settling: first sample after which |y - r| stays inside the band.
  const double band = tol::kSettleBandFrac * std::abs(r);
  std::size_t last_out = 0;
  bool ever_out = false;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(traj.y[k] - r) > band) {
      last_out = k;
      ever_out = true;
    }
  }
  if (!ever_out) {
    m.settling_time_s = 0.0;
  } else if (last_out + 1 < n) {
    m.settling_time_s = traj.t[last_out + 1];
  } else {
    m.settling_time_s = inf;  // never enters the band for good
  }
  return m;
}

}  // namespace quadpid
