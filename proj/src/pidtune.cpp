#include "quadpid/pidtune.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "quadpid/tolerances.hpp"

namespace quadpid {

namespace {

// Single-output loops only: the PID law differentiates one scalar signal.
void require_single_output(const StateSpaceModel& sys) {
  validate_dimensions(sys);
  if (sys.num_outputs() != 1 || sys.num_inputs() != 1) {
    throw std::invalid_argument("PID mapping is defined for SISO loops");
  }
}

}  // namespace

MnlMatrices extract_mnl(const PidGains& g, const StateSpaceModel& sys) {
  require_single_output(sys);
  if (!std::isfinite(g.k_p) || !std::isfinite(g.k_i) ||
      !std::isfinite(g.k_d)) {
    throw std::invalid_argument("PID gains must be finite");
  }
  const double cbu = (sys.c * sys.b_u)(0, 0);
  const double factor = 1.0 + g.k_d * cbu;
  if (std::abs(factor) < 1e-12) {
    std::ostringstream os;
    os << "derivative loop is degenerate: 1 + K_D*(C B_u) = " << factor;
    throw std::runtime_error(os.str());
  }
  MnlMatrices out;
  out.inv_factor = Matrix::Constant(1, 1, 1.0 / factor);
  out.m = (g.k_p * sys.c + g.k_d * sys.c * sys.a) / factor;
  out.n = g.k_d * (sys.c * sys.b_w) / factor;
  out.l = Matrix::Constant(1, 1, g.k_i / factor);
  return out;
}

PidExtraction pid_from_state_gain(const FeedbackGain& k_aug,
                                  const StateSpaceModel& sys) {
  require_single_output(sys);
  const Eigen::Index n = sys.n();
  if (k_aug.k.rows() != 1 || k_aug.k.cols() != n + 1) {
    throw std::invalid_argument(
        "gain must be sized for the integrator-augmented state");
  }
  const Matrix m = k_aug.k.leftCols(n);   // K1
  const Matrix l = k_aug.k.rightCols(1);  // K2

  // [K_P K_D] solves [K_P K_D] * [C; CA - CB_u M] = M.
  Matrix stack(2, n);
  stack.row(0) = sys.c;
  stack.row(1) = sys.c * sys.a - (sys.c * sys.b_u)(0, 0) * m;

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(stack.transpose());
  if (cod.rank() < 2) {
    std::ostringstream os;
    os << "stacked measurement matrix has row rank " << cod.rank()
       << " (need 2); gains are not recoverable";
    throw std::runtime_error(os.str());
  }
  const Matrix kpd = cod.solve(m.transpose()).transpose();  // 1 x 2

  PidExtraction out;
  out.gains.k_p = kpd(0, 0);
  out.gains.k_d = kpd(0, 1);
  const double cbu = (sys.c * sys.b_u)(0, 0);
  out.gains.k_i = (1.0 + out.gains.k_d * cbu) * l(0, 0);
  const double m_norm = m.norm();
  out.ls_residual =
      (kpd * stack - m).norm() / (m_norm > 0.0 ? m_norm : 1.0);
  out.residual_warning = out.ls_residual > tol::kPidResidualWarnRel;
  return out;
}

StateSpaceModel pid_closed_loop(const StateSpaceModel& sys, const PidGains& g,
                                const PidLoopOptions& opt) {
  const MnlMatrices mnl = extract_mnl(g, sys);
  const Eigen::Index n = sys.n();

  StateSpaceModel cl;
  cl.a = Matrix::Zero(n + 1, n + 1);
  cl.a.topLeftCorner(n, n) = sys.a - sys.b_u * mnl.m;
  cl.a.topRightCorner(n, 1) = -sys.b_u * mnl.l;
  cl.a.bottomLeftCorner(1, n) = sys.c;  // zeta' = y - r

  // Reference channel: drives the integrator, and the plant input directly
  // when the proportional term acts on the error.
  cl.b_u = Matrix::Zero(n + 1, 1);
  cl.b_u(n, 0) = -1.0;
  if (opt.error_side_p) {
    cl.b_u.topRows(n) = sys.b_u * (mnl.inv_factor(0, 0) * g.k_p);
  }

  cl.b_w = Matrix::Zero(n + 1, sys.b_w.cols());
  cl.b_w.topRows(n) = sys.b_w;
  if (opt.feed_forward_wind) {
    cl.b_w.topRows(n) -= sys.b_u * mnl.n;
  }

  cl.c = Matrix::Zero(1, n + 1);
  cl.c.leftCols(n) = sys.c;

  cl.state_labels = sys.state_labels;
  cl.state_labels.push_back("zeta1");
  cl.input_unit = "reference";
  cl.disturbance_unit = sys.disturbance_unit;
  return cl;
}

}  // namespace quadpid
