#pragma once

// Linearized (large-alpha) benchmark in the Gaussian formalism.
//
// Conventions: r = (X, Y, Q, P) with X = (a + a^dag)/sqrt 2 for the optical
// fluctuation and Q, P for the mechanics; sigma = Tr[rho {dr, dr^T}], so the
// vacuum has sigma = 1 and a thermal mode (2 nbar + 1) 1. The symplectic form
// is omega = (+) [[0, 1], [-1, 0]]. Time is tau = Omega t and g = g0 / Omega.

#include <Eigen/Dense>

#include "optotherm/metrology.hpp"

namespace optotherm {

using Matrix2 = Eigen::Matrix2d;
using Matrix4 = Eigen::Matrix4d;

/// First moments and covariance matrix of a one- or two-mode Gaussian state.
class CovarianceState {
public:
    /// Throws DomainError unless cov is symmetric to 1e-12 and satisfies
    /// cov + i omega >= 0 to -1e-10.
    CovarianceState(RVector first_moments, RMatrix cov);

    const RVector& first_moments() const noexcept { return first_moments_; }
    const RMatrix& cov() const noexcept { return cov_; }
    int modes() const noexcept { return static_cast<int>(cov_.rows() / 2); }

    /// Optical mode (first 2x2 block): the partial trace over the mechanics.
    CovarianceState optical() const;

    /// Smallest eigenvalue of cov + i omega.
    double uncertainty_margin() const;

private:
    RVector first_moments_;
    RMatrix cov_;
};

/// omega = (+)_modes [[0, 1], [-1, 0]]
RMatrix symplectic_form(int modes);

/// Initial state: coherent light (vacuum fluctuations) and a thermal oscillator.
CovarianceState initial_covariance(double nbar);

/// H_lin with r^T H r / 2 = (Q^2 + P^2)/2 - 2 g alpha Q X.
Matrix4 linearized_hamiltonian_matrix(double g, double alpha);

/// S(tau) = exp(omega H_lin tau).
Matrix4 symplectic_propagator(double g, double alpha, double tau);

/// sigma(tau) = S sigma0 S^T. Throws PrecisionError when S omega S^T
/// deviates from omega by more than 1e-10.
CovarianceState evolve_covariance(const CovarianceState& sigma0, double g, double alpha, double tau);

/// sigma_L = [[1, f], [f, 1 + h + f^2]] with f = 4 g^2 a^2 (tau - sin tau),
/// h = 8 g^2 a^2 (1 - cos tau)(2 nbar + 1).
Matrix2 sigma_L_closed_form(double g, double alpha, double nbar, double tau);

/// d sigma_L / d nbar; only h depends on nbar.
Matrix2 sigma_L_derivative(double g, double alpha, double tau);

/// Single-mode Gaussian QFI
///   F = Tr[(s^-1 ds)^2] / (2 (1 + mu^2)) + 2 (d mu)^2 / (1 - mu^4),
/// mu = 1 / sqrt(det s). The second term is dropped in the pure limit
/// (1 - mu^4 < 1e-12 with d mu = 0).
FisherResult gaussian_qfi(const Matrix2& sigma, const Matrix2& dsigma);

/// Map nbar -> (sigma_L, d sigma_L / d nbar).
using CovarianceBuilder = std::function<std::pair<Matrix2, Matrix2>(double nbar)>;

FisherResult gaussian_qfi(const CovarianceBuilder& builder, double nbar);

/// Gaussian QFI of the linearized reduced state.
FisherResult gaussian_qfi(double g, double alpha, double nbar, double tau);

/// 8 g^2 a^2 (cos tau - 1) / [(2 nbar + 1)(4 g^2 a^2 (2 nbar + 1)(cos tau - 1) - 1)]
double gaussian_qfi_closed_form(double g, double alpha, double nbar, double tau);

/// sigma_M = R(theta) diag(z, 1/z) R(theta)^T with
/// R(theta) = [[cos, sin], [-sin, cos]]. z -> 0 is homodyne of
/// cos(theta) X - sin(theta) Y, z = 1 heterodyne.
struct GeneralDyneSetting {
    double z = 1.0;
    double theta = 0.0;

    GeneralDyneSetting(double z_, double theta_);

    Matrix2 covariance() const;
};

/// F_C = Tr[(S^-1 dS)^2] / 2 with S = (sigma_L + sigma_M)/2.
FisherResult generaldyne_cfi(const Matrix2& sigma_L, const Matrix2& dsigma_L, GeneralDyneSetting setting);

struct HomodyneLimit {
    double value = 0.0;         // F_C at z = 1e-6
    double value_finer = 0.0;   // F_C at z = 1e-7
    double extrapolated = 0.0;  // Richardson, linear in z
};

/// Homodyne CFI as the z -> 0 limit of the general-dyne formula.
HomodyneLimit homodyne_cfi_limit(const Matrix2& sigma_L, const Matrix2& dsigma_L, double theta);

/// Closed-form homodyne CFI at tau = pi:
///   2 (4 g a sin th)^4 / [cos^2 th - 4 pi g^2 a^2 sin 2th
///                          + (1 + 16 g^2 a^2 (1 + 2 nbar) + 16 pi^2 g^4 a^4) sin^2 th]^2
double homodyne_cfi_closed_form(double g, double alpha, double nbar, double theta);

} // namespace optotherm
