#pragma once

// Fisher information for nbar: quantum (SLD spectral formula) and classical
// (homodyne), optimizers over g and the local-oscillator phase, and a
// Monte Carlo homodyne experiment with a grid Bayesian estimator.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "optotherm/dynamics.hpp"
#include "optotherm/hilbert.hpp"

namespace optotherm {

/// Physical configuration a Fisher value was computed at. NaN marks a field
/// that does not apply.
struct SystemParams {
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double nbar = std::numeric_limits<double>::quiet_NaN();
    double g = std::numeric_limits<double>::quiet_NaN();
    double tau = std::numeric_limits<double>::quiet_NaN();
    double chi = 0.0;
    double phi_lo = std::numeric_limits<double>::quiet_NaN();
    int n_max = 0;
};

enum class FisherMethod { sld_spectral, homodyne_quadrature, gaussian_covariance, gaussian_generaldyne };

enum class DerivativeScheme { analytic, central_difference };

std::string to_string(FisherMethod m);
std::string to_string(DerivativeScheme s);

struct FisherNumerics {
    double eigenvalue_floor = 0.0;
    int excluded_pairs = 0;       // SLD pairs with eigenvalue sum <= floor
    int quadrature_points = 0;
    double quadrature_error = 0.0;  // relative change under grid doubling
    DerivativeScheme derivative = DerivativeScheme::analytic;
};

/// Fisher information with respect to nbar (units 1/nbar^2).
struct FisherResult {
    double value = 0.0;
    SystemParams point;
    FisherMethod method = FisherMethod::sld_spectral;
    FisherNumerics numerics;
};

/// Probe state as a function of nbar, for families without the dephasing
/// structure. Derivatives are taken by central differences.
using StateMap = std::function<ProbeState(double nbar)>;

/// A dephasing family together with the configuration it was built from.
struct ProbeModel {
    CoherentAmplitude alpha;
    CouplingParams coupling;
    KerrStrength kerr{0.0};
    FockCutoff cutoff;

    ProbeModel(double alpha_, double g, double tau, double chi = 0.0, std::optional<FockCutoff> cutoff_ = {});

    DephasingFamily family() const;
    SystemParams params(double nbar, double phi_lo = std::numeric_limits<double>::quiet_NaN()) const;
    ProbeModel with_cutoff(FockCutoff c) const;
};

struct QfiOptions {
    double eigenvalue_floor = 1e-12;
    double dn = 0.0;  // 0 -> 1e-4 (1 + nbar); used by the central-difference path only
};

/// F_Q = 2 sum_{n,m} |<psi_m|d rho|psi_n>|^2 / (p_m + p_n) over pairs with
/// p_m + p_n > floor. Throws PrecisionError if the sum is below -1e-10.
FisherResult qfi_from(const CMatrix& rho, const CMatrix& drho, double eigenvalue_floor = 1e-12);

/// QFI with the analytic elementwise derivative.
FisherResult qfi(const ProbeModel& model, double nbar, const QfiOptions& opts = {});
FisherResult qfi(const DephasingFamily& family, double nbar, const QfiOptions& opts = {});

/// QFI of an arbitrary state map by central differences in nbar.
FisherResult qfi(const StateMap& builder, double nbar, const QfiOptions& opts = {});

/// Symmetric logarithmic derivative in the Fock basis, satisfying
/// d rho = (L rho + rho L)/2 on the support of rho.
CMatrix symmetric_log_derivative(const CMatrix& rho, const CMatrix& drho, double eigenvalue_floor = 1e-12);

struct GmaxOptions {
    double g_lo = 0.01;
    double g_hi = 3.0;
    int scan_points = 60;
    double g_tol = 1e-4;
    std::optional<FockCutoff> cutoff;
};

struct GmaxResult {
    double g_max = 0.0;
    double fq_max = 0.0;
    bool on_boundary = false;
};

/// Coupling maximizing the QFI at fixed (alpha, nbar, tau): grid scan then
/// golden-section refinement; ties within 1e-9 go to the smallest g.
GmaxResult find_gmax(double alpha, double nbar, double tau, const GmaxOptions& opts = {});

/// Local-oscillator phase of the homodyne quadrature
/// x_phi = (a e^{-i phi} + a^dag e^{i phi}) / sqrt(2).
struct HomodyneSetting {
    double phi_lo = 0.0;
};

/// p(x) = sum_{n,m} rho_{nm} e^{i phi (m-n)} psi_m(x) psi_n(x).
double homodyne_pdf(const ProbeState& rho, HomodyneSetting setting, double x);

/// Homodyne density over many abscissae at once; accepts any Hermitian
/// matrix (used for d rho as well).
RVector homodyne_density(const CMatrix& rho, HomodyneSetting setting, const RVector& x);

struct QuadratureSpec {
    double half_width = 0.0;  // 0 -> sqrt(2) alpha + 8 from the state's mean photon number
    int points = 2001;
    double pdf_floor = 1e-14;
    double rel_tol = 1e-4;  // allowed change under grid doubling
};

/// Uniform abscissae on [-L, L] for the given spec and state.
RVector quadrature_grid(const QuadratureSpec& spec, double mean_photon_number, int points);

/// F_C = int (d_nbar p)^2 / p dx with the analytic derivative of the state.
/// Throws PrecisionError when grid doubling changes the value by more than
/// rel_tol (relative).
FisherResult cfi_homodyne(const ProbeModel& model, double nbar, HomodyneSetting setting,
                          const QuadratureSpec& quad = {});
FisherResult cfi_homodyne(const DephasingFamily& family, double nbar, HomodyneSetting setting,
                          const QuadratureSpec& quad = {});
/// Central-difference variant for arbitrary state maps.
FisherResult cfi_homodyne(const StateMap& builder, double nbar, HomodyneSetting setting,
                          const QuadratureSpec& quad = {}, double dn = 0.0);

struct PhiOptions {
    int points = 64;  // grid on [0, pi); F_C has period pi in phi
    QuadratureSpec quadrature;
};

struct PhiOptimum {
    double phi_star = 0.0;  // in [0, pi)
    double fc = 0.0;
    double fq = 0.0;
    double ratio = 0.0;
};

/// Maximizes F_C over phi_lo with a grid and a parabolic refinement.
PhiOptimum optimal_phi_lo(const ProbeModel& model, double nbar, const PhiOptions& opts = {});

/// Distance of phi to the nearest multiple of pi.
double distance_mod_pi(double phi);

/// M i.i.d. homodyne outcomes by inverse-CDF on a tabulated density.
std::vector<double> sample_homodyne(const ProbeState& rho, HomodyneSetting setting, int count, std::uint64_t seed);

struct PriorRange {
    double lo = 0.0;
    double hi = 1.5;
};

struct EstimationRun {
    int count = 0;
    std::vector<double> samples;
    RVector grid;
    RVector posterior;  // normalized point masses on grid
    double estimate = 0.0;
    double variance = 0.0;
    bool boundary_warning = false;
};

/// Flat-prior grid posterior over nbar, posterior mean and variance.
EstimationRun bayesian_estimate(std::vector<double> samples, const DephasingFamily& family,
                                HomodyneSetting setting, PriorRange prior, int grid_points);
EstimationRun bayesian_estimate(std::vector<double> samples, const StateMap& builder, HomodyneSetting setting,
                                PriorRange prior, int grid_points);

} // namespace optotherm
