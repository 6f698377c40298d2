#pragma once

// Fock-space foundations: cutoffs, coherent coefficients, Hermite functions,
// validated density matrices and their spectral decomposition.

#include <complex>
#include <optional>

#include <Eigen/Dense>

namespace optotherm {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Truncation of a bosonic mode to photon (phonon) numbers 0..n_max.
class FockCutoff {
public:
    explicit FockCutoff(int n_max);

    /// Default rule for a coherent probe: ceil(alpha^2 + 8 alpha + 10).
    static FockCutoff for_coherent(double alpha);

    int n_max() const noexcept { return n_max_; }
    int dim() const noexcept { return n_max_ + 1; }
    FockCutoff doubled() const { return FockCutoff(2 * n_max_ + 1); }

    friend bool operator==(FockCutoff, FockCutoff) = default;

private:
    int n_max_;
};

/// Real coherent amplitude alpha >= 0.
struct CoherentAmplitude {
    double alpha = 0.0;

    explicit CoherentAmplitude(double a);
};

/// Thermal occupation of the mechanical oscillator.
class OscillatorSpec {
public:
    explicit OscillatorSpec(double nbar);

    /// Derive nbar from a temperature in kelvin and an angular frequency in
    /// rad/s via Bose-Einstein statistics.
    static OscillatorSpec from_temperature(double kelvin, double omega);

    double nbar() const noexcept { return nbar_; }
    std::optional<double> temperature() const noexcept { return kelvin_; }
    std::optional<double> omega() const noexcept { return omega_; }

private:
    double nbar_;
    std::optional<double> kelvin_;
    std::optional<double> omega_;
};

inline constexpr double kHbar = 1.054571817e-34;     // J s
inline constexpr double kBoltzmann = 1.380649e-23;   // J / K

/// 1 / (exp(x) - 1) for the dimensionless ratio x = hbar Omega / (k_B T).
double nbar_from_ratio(double x);

/// Bose-Einstein occupation for temperature T [K] and frequency Omega [rad/s].
double nbar_from_temperature(double kelvin, double omega);

/// Inverse of nbar_from_temperature.
double temperature_from_nbar(double nbar, double omega);

/// d nbar / d T at fixed Omega. Fisher information w.r.t. T is
/// F_T = F_nbar * (d nbar / d T)^2.
double dnbar_dtemperature(double kelvin, double omega);

/// Coherent-state Fock amplitudes c_n = exp(-a^2/2) a^n / sqrt(n!).
/// Throws TruncationError if the retained norm is below 1 - tail_tol.
CVector coherent_coefficients(CoherentAmplitude alpha, FockCutoff cutoff,
                              double tail_tol = 1e-12);

/// Normalized Hermite functions psi_n(x) = <x|n>, n = 0..n_max.
RVector hermite_functions(double x, FockCutoff cutoff);

/// Hermite functions for many abscissae at once, shape (x.size(), dim).
RMatrix hermite_table(const RVector& x, FockCutoff cutoff);

/// Tolerances enforced on every ProbeState.
struct StateTolerance {
    static constexpr double hermitian = 1e-12;
    static constexpr double trace = 1e-9;
    static constexpr double psd = -1e-10;
};

/// Density matrix of the optical probe in the Fock basis. Immutable; the
/// constructor enforces Hermiticity, unit trace and positivity.
class ProbeState {
public:
    explicit ProbeState(CMatrix elements);

    static ProbeState pure(const CVector& amplitudes);

    int dim() const noexcept { return static_cast<int>(elements_.rows()); }
    FockCutoff cutoff() const { return FockCutoff(dim() - 1); }
    const CMatrix& matrix() const noexcept { return elements_; }
    Complex operator()(int n, int m) const { return elements_(n, m); }

    double trace() const;
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }
    double mean_photon_number() const;

private:
    CMatrix elements_;
    double min_eigenvalue_ = 0.0;
};

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending.
struct Spectrum {
    RVector values;
    CMatrix vectors;       // columns are eigenvectors
    double raw_min = 0.0;  // smallest eigenvalue before clipping
    int clipped = 0;       // eigenvalues in [-1e-10, 0) set to zero

    CMatrix reconstruct() const;
};

/// Throws ContractViolation when the matrix is not Hermitian to 1e-12.
/// Eigenvalues in (-1e-10, 0) are clipped to zero and counted; anything more
/// negative is kept as is and shows up in raw_min.
Spectrum eigendecompose_hermitian(const CMatrix& rho);
Spectrum eigendecompose_hermitian(const ProbeState& rho);

/// Largest elementwise modulus of a - b.
double max_abs_diff(const CMatrix& a, const CMatrix& b);

} // namespace optotherm
