#include "optotherm/gaussian.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "optotherm/errors.hpp"

namespace optotherm {

RMatrix symplectic_form(int modes) {
    RMatrix omega = RMatrix::Zero(2 * modes, 2 * modes);
    for (int k = 0; k < modes; ++k) {
        omega(2 * k, 2 * k + 1) = 1.0;
        omega(2 * k + 1, 2 * k) = -1.0;
    }
    return omega;
}

CovarianceState::CovarianceState(RVector first_moments, RMatrix cov)
    : first_moments_(std::move(first_moments)), cov_(std::move(cov)) {
    if (cov_.rows() != cov_.cols() || cov_.rows() % 2 != 0 || cov_.rows() == 0) {
        throw DomainError("CovarianceState: covariance must be square with even dimension");
    }
    if (first_moments_.size() != cov_.rows()) throw DomainError("CovarianceState: first-moment size mismatch");
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw DomainError("CovarianceState: covariance not symmetric");
    }
    if (uncertainty_margin() < -1e-10) {
        throw DomainError("CovarianceState: covariance violates the uncertainty relation");
    }
}

double CovarianceState::uncertainty_margin() const {
    const CMatrix m = cov_.cast<Complex>() + Complex(0.0, 1.0) * symplectic_form(modes()).cast<Complex>();
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

CovarianceState CovarianceState::optical() const {
    return CovarianceState(first_moments_.head(2), cov_.topLeftCorner(2, 2));
}

CovarianceState initial_covariance(double nbar) {
    if (!(nbar >= 0.0)) throw DomainError("initial_covariance: nbar must be >= 0");
    RMatrix cov = RMatrix::Identity(4, 4);
    cov(2, 2) = cov(3, 3) = 2.0 * nbar + 1.0;
    return CovarianceState(RVector::Zero(4), cov);
}

Matrix4 linearized_hamiltonian_matrix(double g, double alpha) {
    // The mechanical block is +Omega on both diagonal entries (Omega = 1 after
    // rescaling); that sign is what reproduces sigma_L_closed_form.
    Matrix4 h = Matrix4::Zero();
    h(0, 2) = h(2, 0) = -2.0 * g * alpha;
    h(2, 2) = 1.0;
    h(3, 3) = 1.0;
    return h;
}

Matrix4 symplectic_propagator(double g, double alpha, double tau) {
    if (!(tau >= 0.0)) throw DomainError("symplectic_propagator: tau must be >= 0");
    const Matrix4 omega = symplectic_form(2);
    const Matrix4 generator = omega * linearized_hamiltonian_matrix(g, alpha) * tau;
    return generator.exp();
}

CovarianceState evolve_covariance(const CovarianceState& sigma0, double g, double alpha, double tau) {
    if (sigma0.modes() != 2) throw DomainError("evolve_covariance: expects a two-mode state");
    const Matrix4 s = symplectic_propagator(g, alpha, tau);
    const Matrix4 omega = symplectic_form(2);
    const double residual = (s * omega * s.transpose() - omega).cwiseAbs().maxCoeff();
    if (residual > 1e-10) {
        std::ostringstream msg;
        msg << "evolve_covariance: symplectic residual " << residual << " exceeds 1e-10";
        throw PrecisionError(msg.str());
    }
    RMatrix cov = s * sigma0.cov() * s.transpose();
    cov = 0.5 * (cov + cov.transpose());
    return CovarianceState(s * sigma0.first_moments(), cov);
}

Matrix2 sigma_L_closed_form(double g, double alpha, double nbar, double tau) {
    const double ga2 = g * g * alpha * alpha;
    const double f = 4.0 * ga2 * (tau - std::sin(tau));
    const double h = 8.0 * ga2 * (1.0 - std::cos(tau)) * (2.0 * nbar + 1.0);
    Matrix2 s;
    s << 1.0, f, f, 1.0 + h + f * f;
    return s;
}

Matrix2 sigma_L_derivative(double g, double alpha, double tau) {
    Matrix2 d = Matrix2::Zero();
    d(1, 1) = 16.0 * g * g * alpha * alpha * (1.0 - std::cos(tau));
    return d;
}

FisherResult gaussian_qfi(const Matrix2& sigma, const Matrix2& dsigma) {
    const double det = sigma.determinant();
    if (!(det > 0.0)) throw DomainError("gaussian_qfi: covariance matrix is singular");
    const Matrix2 inv = sigma.inverse();
    const Matrix2 a = inv * dsigma;
    const double mu = 1.0 / std::sqrt(det);
    const double mu2 = mu * mu;
    // d mu = -mu Tr[s^-1 ds] / 2
    const double dmu = -0.5 * mu * a.trace();
    double f = (a * a).trace() / (2.0 * (1.0 + mu2));
    const double one_minus_mu4 = 1.0 - mu2 * mu2;
    if (one_minus_mu4 >= 1e-12) {
        f += 2.0 * dmu * dmu / one_minus_mu4;
    } else if (dmu != 0.0) {
        throw DomainError("gaussian_qfi: purity derivative nonzero at a pure state");
    }
    FisherResult out;
    out.value = f;
    out.method = FisherMethod::gaussian_covariance;
    return out;
}

FisherResult gaussian_qfi(const CovarianceBuilder& builder, double nbar) {
    const auto [sigma, dsigma] = builder(nbar);
    FisherResult out = gaussian_qfi(sigma, dsigma);
    out.point.nbar = nbar;
    return out;
}

FisherResult gaussian_qfi(double g, double alpha, double nbar, double tau) {
    const CovarianceBuilder builder = [&](double n) {
        return std::pair{sigma_L_closed_form(g, alpha, n, tau), sigma_L_derivative(g, alpha, tau)};
    };
    FisherResult out = gaussian_qfi(builder, nbar);
    out.point.alpha = alpha;
    out.point.g = g;
    out.point.tau = tau;
    return out;
}

double gaussian_qfi_closed_form(double g, double alpha, double nbar, double tau) {
    const double ga2 = g * g * alpha * alpha;
    const double c = std::cos(tau) - 1.0;
    const double s = 2.0 * nbar + 1.0;
    return 8.0 * ga2 * c / (s * (4.0 * ga2 * s * c - 1.0));
}

GeneralDyneSetting::GeneralDyneSetting(double z_, double theta_) : z(z_), theta(theta_) {
    if (!(z > 0.0)) throw DomainError("GeneralDyneSetting: z must be > 0");
}

Matrix2 GeneralDyneSetting::covariance() const {
    Matrix2 r;
    r << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
    return r * Eigen::Vector2d(z, 1.0 / z).asDiagonal() * r.transpose();
}

FisherResult generaldyne_cfi(const Matrix2& sigma_L, const Matrix2& dsigma_L, GeneralDyneSetting setting) {
    const Matrix2 big_sigma = 0.5 * (sigma_L + setting.covariance());
    const Matrix2 a = big_sigma.inverse() * (0.5 * dsigma_L);
    FisherResult out;
    out.value = 0.5 * (a * a).trace();
    out.method = FisherMethod::gaussian_generaldyne;
    return out;
}

HomodyneLimit homodyne_cfi_limit(const Matrix2& sigma_L, const Matrix2& dsigma_L, double theta) {
    constexpr double z1 = 1e-6;
    constexpr double z2 = 1e-7;
    HomodyneLimit out;
    out.value = generaldyne_cfi(sigma_L, dsigma_L, GeneralDyneSetting(z1, theta)).value;
    out.value_finer = generaldyne_cfi(sigma_L, dsigma_L, GeneralDyneSetting(z2, theta)).value;
    out.extrapolated = out.value_finer + (out.value_finer - out.value) * z2 / (z1 - z2);
    return out;
}

double homodyne_cfi_closed_form(double g, double alpha, double nbar, double theta) {
    const double ga = g * alpha;
    const double ga2 = ga * ga;
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double num = 2.0 * std::pow(4.0 * ga * s, 4);
    const double den = c * c - 4.0 * kPi * ga2 * std::sin(2.0 * theta) +
                       (1.0 + 16.0 * ga2 * (1.0 + 2.0 * nbar) + 16.0 * kPi * kPi * ga2 * ga2) * s * s;
    return num / (den * den);
}

} // namespace optotherm
