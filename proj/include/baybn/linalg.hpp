#pragma once

#include <Eigen/Dense>

#include <vector>

namespace baybn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Inverse of a symmetric positive-definite matrix through its Cholesky factor.
// Throws NumericError (with smallest/largest eigenvalue in the message) when
// the factorization fails.
Matrix spd_inverse(const Matrix& a);

// log det of an SPD matrix; throws NumericError if `a` is not SPD.
double spd_log_det(const Matrix& a);

bool is_spd(const Matrix& a);

double max_abs(const Matrix& a);

// Largest absolute row sum, i.e. the l_inf -> l_inf operator norm.
double linf_operator_norm(const Matrix& a);

// Spectral norm of a symmetric matrix.
double symmetric_spectral_norm(const Matrix& a);

double min_eigenvalue(const Matrix& a);

Matrix principal_submatrix(const Matrix& a, const std::vector<int>& idx);

}  // namespace baybn
