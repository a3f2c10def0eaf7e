#include "shadow/spectral.hpp"

#include <cmath>

#include "shadow/errors.hpp"

namespace shadow {

EighResult eigh(const Eigen::MatrixXcd& a) {
    if (a.rows() != a.cols()) throw ValidationError("eigh: matrix must be square");
    const double norm = a.norm();
    const double asym = (a - a.adjoint()).norm();
    if (asym > 1e-10 * std::max(norm, 1.0))
        throw ValidationError("eigh: input not Hermitian (||A - A^H||_F = " +
                              std::to_string(asym) + ")");
    Eigen::MatrixXcd sym = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sym);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eigh: eigendecomposition did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

double trace_log_shifted(const EighResult& eig, double eps) {
    const double lmin = eig.eigenvalues.size() ? eig.eigenvalues(0) : 0.0;
    if (lmin + eps <= 0.0) throw BarrierDomainError(lmin, eps);
    double s = 0.0;
    for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i)
        s += std::log(eig.eigenvalues(i) + eps);
    return s;
}

double trace_log_shifted(const Eigen::MatrixXcd& a, double eps) {
    return trace_log_shifted(eigh(a), eps);
}

Eigen::MatrixXcd inverse_shifted(const EighResult& eig, double eps) {
    const double lmin = eig.eigenvalues.size() ? eig.eigenvalues(0) : 0.0;
    if (lmin + eps <= 0.0) throw BarrierDomainError(lmin, eps);
    Eigen::VectorXd inv = (eig.eigenvalues.array() + eps).inverse();
    return eig.eigenvectors * inv.asDiagonal() * eig.eigenvectors.adjoint();
}

Eigen::MatrixXcd inverse_shifted(const Eigen::MatrixXcd& a, double eps) {
    return inverse_shifted(eigh(a), eps);
}

} // namespace shadow
