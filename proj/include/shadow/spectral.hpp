#pragma once

#include <Eigen/Dense>

namespace shadow {

/// Eigendecomposition A = V diag(lambda) V^dagger with eigenvalues
/// ascending.
struct EighResult {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXcd eigenvectors;
};

/// Dense Hermitian eigendecomposition. Input is validated against
/// ||A - A^dagger||_F <= 1e-10 * max(||A||_F, 1) and symmetrized before
/// solving. One decomposition per epoch serves the feasibility check, the
/// trace-log value and the shifted inverse.
EighResult eigh(const Eigen::MatrixXcd& a);

/// sum_i log(lambda_i + eps). Throws BarrierDomainError if any shifted
/// eigenvalue is non-positive (infeasible iterate).
double trace_log_shifted(const EighResult& eig, double eps);
double trace_log_shifted(const Eigen::MatrixXcd& a, double eps);

/// (A + eps I)^{-1}, formed through the spectral decomposition so the
/// result is Hermitian by construction. Same domain error as the
/// trace-log.
Eigen::MatrixXcd inverse_shifted(const EighResult& eig, double eps);
Eigen::MatrixXcd inverse_shifted(const Eigen::MatrixXcd& a, double eps);

} // namespace shadow
