#include "quadpid/lincore.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "quadpid/tolerances.hpp"

namespace quadpid {

namespace {

void require_square_finite(const Matrix& m, const char* name) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << name << " must be square, got " << m.rows() << "x" << m.cols();
    throw std::invalid_argument(os.str());
  }
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(name) + " has non-finite entries");
  }
}

void require_symmetric(const Matrix& m, const char* name) {
  const double scale = std::max(1.0, m.norm());
  if ((m - m.transpose()).norm() > tol::kSymmetryRel * scale) {
    throw std::invalid_argument(std::string(name) + " is not symmetric");
  }
}

}  // namespace

std::vector<std::complex<double>> eigenvalues(const Matrix& m) {
  require_square_finite(m, "matrix");
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eigenvalue iteration failed to converge");
  }
  const auto& vals = es.eigenvalues();
  return {vals.data(), vals.data() + vals.size()};
}

double spectral_abscissa(const Matrix& m) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& ev : eigenvalues(m)) worst = std::max(worst, ev.real());
  return worst;
}

bool is_hurwitz(const Matrix& m) { return spectral_abscissa(m) < 0.0; }

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
  require_square_finite(a, "a");
  require_square_finite(q, "q");
  if (a.rows() != q.rows()) {
    throw std::invalid_argument("a and q dimensions disagree");
  }
  require_symmetric(q, "q");
  const double abscissa = spectral_abscissa(a);
  if (abscissa >= 0.0) {
    std::ostringstream os;
    os << "a is not Hurwitz (max eigenvalue real part " << abscissa << ")";
    throw std::invalid_argument(os.str());
  }

  // vec(a'P) + vec(Pa) = (I (x) a' + a' (x) I) vec(P) = -vec(q).
  const Eigen::Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix at = a.transpose();
  Matrix sys = Eigen::kroneckerProduct(id, at) + Eigen::kroneckerProduct(at, id);
  Eigen::Map<const Vector> q_vec(q.data(), n * n);
  Eigen::PartialPivLU<Matrix> lu(sys);
  Vector p_vec = lu.solve(-q_vec);
  if (!p_vec.allFinite()) {
    throw std::runtime_error("Lyapunov linear system is singular");
  }
  // One pass of iterative refinement on the factored system: the corrected
  // residual is near machine precision even when the equation is stiff.
  p_vec -= lu.solve(sys * p_vec + q_vec);
  Matrix p = Eigen::Map<Matrix>(p_vec.data(), n, n);

  // The exact solution is symmetric; the antisymmetric component of the
  // linear solve is numerical error and is held to the same
  // condition-aware budget as the residual, then removed.
  const double bound =
      tol::kLyapResidualRel * (a.norm() * p.norm() + q.norm());
  const double asym = (p - p.transpose()).norm();
  if (asym > std::max(bound, 1e-300)) {
    std::ostringstream os;
    os << "Lyapunov solution lost symmetry: |P - P'| = " << asym
       << " exceeds bound " << bound;
    throw std::runtime_error(os.str());
  }
  p = ((p + p.transpose()) / 2.0).eval();

  const double residual = (at * p + p * a + q).norm();
  if (residual > std::max(bound, 1e-300)) {
    std::ostringstream os;
    os << "Lyapunov residual " << residual << " exceeds bound " << bound;
    throw std::runtime_error(os.str());
  }
  return p;
}

namespace {

// Stabilizing gain for (a, b) by the Bass shifted-Lyapunov construction.
// Requires the unstable modes of a to be reachable from b; with shift
// beta above the spectral abscissa, -(a + beta I) is Hurwitz, W solving
// (a+beta I)W + W(a+beta I)' = 2bb' is PSD, and a - b(b'W^-1) is Hurwitz.
Matrix stabilizing_gain(const Matrix& a, const Matrix& b) {
  if (is_hurwitz(a)) return Matrix::Zero(b.cols(), a.rows());
  // The smallest shift that pushes every eigenvalue of a + beta*I into the
  // open right half plane. Keeping beta small keeps the shifted reachability
  // Gramian well conditioned (a large shift flattens the slow directions).
  double min_real = 0.0;
  for (const auto& ev : eigenvalues(a)) {
    min_real = std::min(min_real, ev.real());
  }
  const double beta = 1.01 * (-min_real) + 1.0;
  const Eigen::Index n = a.rows();
  const Matrix shifted = -(a + beta * Matrix::Identity(n, n)).transpose();
  const Matrix w = solve_lyapunov(shifted, 2.0 * b * b.transpose());
  Eigen::FullPivLU<Matrix> lu(w);
  if (!lu.isInvertible()) {
    throw std::runtime_error(
        "stabilizing-gain construction failed: reachability Gramian of the "
        "shifted system is singular (is (a, b) stabilizable?)");
  }
  const Matrix k0 = (lu.solve(b)).transpose();  // b' W^-1
  if (!is_hurwitz(a - b * k0)) {
    throw std::runtime_error(
        "stabilizing-gain construction produced a non-stabilizing gain");
  }
  return k0;
}

}  // namespace

Matrix solve_care(const Matrix& a, const Matrix& b, const Matrix& q,
                  const Matrix& r, const Matrix& s) {
  require_square_finite(a, "a");
  require_square_finite(q, "q");
  require_square_finite(r, "r");
  require_symmetric(q, "q");
  require_symmetric(r, "r");
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  if (b.rows() != n || q.rows() != n || r.rows() != m || s.rows() != n ||
      s.cols() != m) {
    throw std::invalid_argument("CARE operand dimensions disagree");
  }

  Eigen::LLT<Matrix> r_llt(r);
  if (r_llt.info() != Eigen::Success) {
    throw std::invalid_argument("r is not positive definite");
  }

  // Fold the cross term: minimize over v = u + r^-1 s' x.
  const Matrix r_inv_st = r_llt.solve(s.transpose());
  const Matrix a_tilde = a - b * r_inv_st;
  Matrix q_tilde = q - s * r_inv_st;
  q_tilde = ((q_tilde + q_tilde.transpose()) / 2.0).eval();
  {
    Eigen::SelfAdjointEigenSolver<Matrix> qe(q_tilde);
    if (qe.eigenvalues().minCoeff() <
        -tol::kPsdSlackRel * std::max(1.0, q_tilde.norm())) {
      throw std::invalid_argument(
          "q - s r^-1 s' is not positive semidefinite");
    }
  }

  // Newton recursion: with k_i stabilizing for (a~, b),
  //   (a~ - b k_i)' P + P (a~ - b k_i) + q~ + k_i' r k_i = 0,
  //   k_{i+1} = r^-1 b' P.
  Matrix k = stabilizing_gain(a_tilde, b);
  Matrix p = Matrix::Zero(n, n);
  double step = std::numeric_limits<double>::infinity();
  for (int it = 0; it < tol::kCareMaxIterations; ++it) {
    const Matrix a_cl = a_tilde - b * k;
    Matrix rhs = q_tilde + k.transpose() * r * k;
    rhs = ((rhs + rhs.transpose()) / 2.0).eval();
    const Matrix p_next = solve_lyapunov(a_cl, rhs);
    step = (p_next - p).norm() / std::max(1.0, p_next.norm());
    p = p_next;
    k = r_llt.solve(b.transpose() * p);
    if (step < 1e-15) break;
  }

  // Validate by substitution against the original (cross-term) equation.
  const Matrix gain = r_llt.solve(b.transpose() * p + s.transpose());
  const Matrix quad = (p * b + s) * gain;
  const Matrix residual =
      a.transpose() * p + p * a - quad + q;
  const double scale = (a.transpose() * p).norm() + (p * a).norm() +
                       quad.norm() + q.norm();
  const double rel = residual.norm() / std::max(1.0, scale);
  if (rel > tol::kCareResidualRel || !p.allFinite()) {
    std::ostringstream os;
    os << "CARE Newton iteration did not converge: relative residual " << rel
       << " after " << tol::kCareMaxIterations << " iterations (last step "
       << step << ")";
    throw std::runtime_error(os.str());
  }
  if (!is_hurwitz(a - b * gain)) {
    throw std::runtime_error("CARE solution is not stabilizing");
  }
  {
    Eigen::SelfAdjointEigenSolver<Matrix> pe(p);
    if (pe.eigenvalues().minCoeff() <
        -tol::kPsdSlackRel * std::max(1.0, p.norm())) {
      throw std::runtime_error("CARE solution is not positive semidefinite");
    }
  }
  return p;
}

Matrix solve_care(const Matrix& a, const Matrix& b, const Matrix& q,
                  const Matrix& r) {
  return solve_care(a, b, q, r, Matrix::Zero(a.rows(), b.cols()));
}

Matrix expm(const Matrix& m, double t) {
  require_square_finite(m, "matrix");
  if (!std::isfinite(t)) throw std::invalid_argument("t is not finite");
  return (m * t).exp();
}

}  // namespace quadpid
