#include "effdyn/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <sstream>

#include "effdyn/errors.hpp"

namespace effdyn {

namespace {

constexpr double kEigFloor = 1e-12;

Mat sym_sqrt(const Mat& m, bool clamp) {
  const double scale = std::max(1.0, m.norm());
  if ((m - m.transpose()).norm() > 1e-9 * scale)
    throw EvaluationError("spd_sqrt input is not symmetric");
  const Mat sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  if (es.info() != Eigen::Success)
    throw NumericError("eigendecomposition failed in spd_sqrt");
  Vec ev = es.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] < kEigFloor) {
      if (!clamp) {
        std::ostringstream msg;
        msg << "spd_sqrt eigenvalue " << ev[i] << " below floor " << kEigFloor;
        throw NumericError(msg.str());
      }
      ev[i] = kEigFloor;
    }
  }
  const Vec root = ev.cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

Mat spd_sqrt(const Mat& m) { return sym_sqrt(m, false); }

Mat spd_sqrt_clamped(const Mat& m) { return sym_sqrt(m, true); }

Mat phi_matrix(const SystemSpec& spec, const Vec& x) {
  const Mat jac = spec.xi_jac(x);
  const Mat a = mobility_at(spec, x);
  Mat phi = jac * a * jac.transpose();
  phi = 0.5 * (phi + phi.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> es(phi);
  if (es.eigenvalues().minCoeff() <= kEigFloor)
    throw DegenerateCoordinateError(
        "Phi is numerically singular: reaction coordinate degenerate at x");
  return phi;
}

Mat projection_pi(const SystemSpec& spec, const Vec& x) {
  const Mat jac = spec.xi_jac(x);
  const Mat a = mobility_at(spec, x);
  const Mat phi = phi_matrix(spec, x);
  // Pi = I - grad(xi)^T Phi^-1 grad(xi) a
  return Mat::Identity(spec.n, spec.n) -
         jac.transpose() * phi.ldlt().solve(jac * a);
}

Mat orthogonal_tangent_projector(const SystemSpec& spec, const Vec& x) {
  const Mat jac = spec.xi_jac(x);
  const Mat gram = jac * jac.transpose();
  return Mat::Identity(spec.n, spec.n) -
         jac.transpose() * gram.ldlt().solve(jac);
}

LevelSetFrame level_set_frame(const SystemSpec& spec, const Vec& x) {
  LevelSetFrame frame;
  frame.x = x;
  frame.grad_xi = spec.xi_jac(x);
  frame.phi = phi_matrix(spec, x);
  frame.A = spd_sqrt(frame.phi);
  frame.Pi = projection_pi(spec, x);
  return frame;
}

FrobeniusResult frobenius_obstruction(const SystemSpec& spec, const Vec& x) {
  const int m = spec.m;
  const int n = spec.n;

  // v_i(x) = a grad(xi_i); Jacobians by central differences.
  auto field = [&spec](int i) {
    return [&spec, i](const Vec& y) -> Vec {
      return mobility_at(spec, y) * spec.xi_jac(y).row(i).transpose();
    };
  };
  std::vector<Vec> v(m);
  std::vector<Mat> jac(m);
  for (int i = 0; i < m; ++i) {
    v[i] = field(i)(x);
    jac[i] = fd_jacobian(field(i), x, n);
  }

  const Mat pi_t = projection_pi(spec, x).transpose();

  FrobeniusResult result;
  result.commutators.assign(m, std::vector<Vec>(m, Vec::Zero(n)));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      // B_ij,l' = (v_i)_l d_l (v_j)_l' - (v_j)_l d_l (v_i)_l'
      const Vec b = jac[j] * v[i] - jac[i] * v[j];
      if (!b.allFinite())
        throw EvaluationError("non-finite commutator in frobenius_obstruction");
      result.commutators[i][j] = b;
      result.residual = std::max(result.residual, (pi_t * b).norm());
    }
  }
  return result;
}

}  // namespace effdyn
