#include "baybn/linalg.hpp"

#include "baybn/errors.hpp"

#include <cmath>
#include <sstream>

namespace baybn {

namespace {

std::string conditioning_message(const Matrix& a) {
  std::ostringstream os;
  os << "matrix of size " << a.rows() << " is not positive definite";
  if (a.rows() > 0 && a.allFinite()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    os << " (eigenvalue range [" << ev.minCoeff() << ", " << ev.maxCoeff() << "])";
  } else if (!a.allFinite()) {
    os << " (non-finite entries)";
  }
  return os.str();
}

Eigen::LLT<Matrix> factor_or_throw(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw NumericError("expected a square matrix");
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success || !a.allFinite()) {
    throw NumericError(conditioning_message(a));
  }
  return llt;
}

}  // namespace

Matrix spd_inverse(const Matrix& a) {
  auto llt = factor_or_throw(a);
  Matrix inv = llt.solve(Matrix::Identity(a.rows(), a.cols()));
  // Solve output is symmetric only up to rounding.
  return 0.5 * (inv + inv.transpose());
}

double spd_log_det(const Matrix& a) {
  auto llt = factor_or_throw(a);
  const Matrix& l = llt.matrixLLT();
  double s = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

bool is_spd(const Matrix& a) {
  if (a.rows() != a.cols() || !a.allFinite()) return false;
  Eigen::LLT<Matrix> llt(a);
  return llt.info() == Eigen::Success;
}

double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double linf_operator_norm(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
}

double symmetric_spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Matrix principal_submatrix(const Matrix& a, const std::vector<int>& idx) {
  return a(idx, idx);
}

}  // namespace baybn
