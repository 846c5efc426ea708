#include "quadpid/models.hpp"

#include <sstream>
#include <stdexcept>

namespace quadpid {

void validate_dimensions(const StateSpaceModel& sys) {
  const Eigen::Index n = sys.a.rows();
  if (sys.a.cols() != n) throw std::invalid_argument("a must be square");
  if (sys.b_u.rows() != n || sys.b_w.rows() != n) {
    throw std::invalid_argument("input matrices must have n rows");
  }
  if (sys.c.cols() != n) {
    throw std::invalid_argument("c must have n columns");
  }
  if (!sys.a.allFinite() || !sys.b_u.allFinite() || !sys.b_w.allFinite() ||
      !sys.c.allFinite()) {
    throw std::invalid_argument("model has non-finite entries");
  }
}

Eigen::MatrixXcd transfer_at(const StateSpaceModel& sys,
                             std::complex<double> s) {
  const Eigen::Index n = sys.n();
  Eigen::MatrixXcd resolvent =
      (s * Eigen::MatrixXcd::Identity(n, n) - sys.a.cast<std::complex<double>>())
          .partialPivLu()
          .solve(sys.b_u.cast<std::complex<double>>());
  return sys.c.cast<std::complex<double>>() * resolvent;
}

StateSpaceModel build_vertical_full(const QuadVerticalParams& p) {
  if (p.thrust_coeff_b <= 0 || p.mass_m <= 0 || p.motor_pole <= 0 ||
      p.motor_gain <= 0) {
    throw std::invalid_argument("vertical-model parameters must be positive");
  }
  const double coupling = 2.0 * p.hover_speed * p.thrust_coeff_b / p.mass_m;
  StateSpaceModel sys;
  sys.a = Matrix::Zero(6, 6);
  sys.a(0, 1) = 1.0;  // z' = v
  // v' couples to the rotor states with alternating sign.
  sys.a(1, 2) = -coupling;
  sys.a(1, 3) = coupling;
  sys.a(1, 4) = -coupling;
  sys.a(1, 5) = coupling;
  for (int i = 2; i < 6; ++i) sys.a(i, i) = -p.motor_pole;
  sys.b_u = Matrix::Zero(6, 1);
  sys.b_u(2, 0) = p.motor_gain;
  sys.b_u(3, 0) = -p.motor_gain;
  sys.b_u(4, 0) = p.motor_gain;
  sys.b_u(5, 0) = -p.motor_gain;
  sys.b_w = Matrix::Zero(6, 1);
  sys.b_w(1, 0) = 1.0;
  sys.c = Matrix::Zero(1, 6);
  sys.c(0, 1) = 1.0;  // vertical velocity
  sys.state_labels = {"z", "v", "omega1", "omega2", "omega3", "omega4"};
  return sys;
}

StateSpaceModel build_velocity_plant() {
  StateSpaceModel sys;
  sys.a = Matrix{{-10.0, 0.0}, {1.0, 0.0}};
  sys.b_u = Matrix{{1.0}, {0.0}};
  sys.b_w = Matrix{{0.0}, {1.0 / kChannelGain}};
  sys.c = Matrix{{0.0, -kChannelGain}};
  sys.state_labels = {"motor", "v_scaled"};
  return sys;
}

StateSpaceModel build_position_plant() {
  StateSpaceModel sys;
  sys.a = Matrix{{-10.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  sys.b_u = Matrix{{1.0}, {0.0}, {0.0}};
  sys.b_w = Matrix{{0.0}, {1.0 / kChannelGain}, {0.0}};
  sys.c = Matrix{{0.0, 0.0, -kChannelGain}};
  sys.state_labels = {"motor", "v_scaled", "pos_scaled"};
  return sys;
}

AugmentedModel augment_with_integrator(const StateSpaceModel& sys,
                                       double zeta_row_scale) {
  validate_dimensions(sys);
  const Eigen::Index n = sys.n();
  const Eigen::Index l = sys.num_outputs();
  StateSpaceModel aug;
  aug.a = Matrix::Zero(n + l, n + l);
  aug.a.topLeftCorner(n, n) = sys.a;
  aug.a.bottomLeftCorner(l, n) = zeta_row_scale * sys.c;
  aug.b_u = Matrix::Zero(n + l, sys.num_inputs());
  aug.b_u.topRows(n) = sys.b_u;
  aug.b_w = Matrix::Zero(n + l, sys.b_w.cols());
  aug.b_w.topRows(n) = sys.b_w;
  aug.c = Matrix::Zero(l, n + l);
  aug.c.leftCols(n) = sys.c;
  aug.state_labels = sys.state_labels;
  for (Eigen::Index i = 0; i < l; ++i) {
    aug.state_labels.push_back("zeta" + std::to_string(i + 1));
  }
  aug.input_unit = sys.input_unit;
  aug.disturbance_unit = sys.disturbance_unit;
  return {sys, aug};
}

std::array<double, 4> rotor_mixer(const RotorCommand& cmd,
                                  const QuadVerticalParams& p) {
  for (double w : cmd.omega) {
    if (w < 0.0) {
      std::ostringstream os;
      os << "rotor speed must be non-negative, got " << w;
      throw std::invalid_argument(os.str());
    }
  }
  const double s1 = cmd.omega[0] * cmd.omega[0];
  const double s2 = cmd.omega[1] * cmd.omega[1];
  const double s3 = cmd.omega[2] * cmd.omega[2];
  const double s4 = cmd.omega[3] * cmd.omega[3];
  const double b = p.thrust_coeff_b;
  return {b * (s1 + s2 + s3 + s4), b * (s2 - s4), b * (s1 - s3),
          p.drag_coeff_d * (s1 - s2 + s3 - s4)};
}

}  // namespace quadpid
