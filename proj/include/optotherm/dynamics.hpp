#pragma once

// Optical probe state after the radiation-pressure interaction with a thermal
// mechanical oscillator, plus the channels used to interpret and undo it.

#include <functional>

#include "optotherm/hilbert.hpp"

namespace optotherm {

/// Dimensionless coupling g = g0/Omega and interaction time tau = Omega t.
struct CouplingParams {
    double g = 0.0;
    double tau = 0.0;

    CouplingParams(double g_, double tau_);

    /// eta = 1 - exp(-i tau)
    Complex eta() const;
    /// Rate of the photon-number-squared phase: tau - sin(tau).
    double kerr_phase_rate() const;
    /// g^2 (1 - cos tau); diffusion exponent per unit (n-m)^2 (1 + 2 nbar).
    double diffusion_rate() const;
};

/// Standard deviation of a Gaussian random phase.
struct DiffusionWidth {
    double delta = 0.0;

    explicit DiffusionWidth(double d);
};

/// Self-Kerr strength chi of U_K = exp(-i chi/2 (a^dag a)^2).
struct KerrStrength {
    double chi = 0.0;

    /// chi = 2 pi g^2 removes the optomechanical phase at tau = pi.
    static KerrStrength cancelling(double g) { return KerrStrength{2.0 * kPi * g * g}; }
};

/// One-parameter family of probe states
///   rho(nbar)_{nm} = base_{nm} * exp(-rate (n-m)^2 (1 + 2 nbar)),
/// which covers the exact reduced state, its small-tau form and any
/// nbar-independent Kerr rotation applied afterwards. The analytic nbar
/// derivative and the band decomposition used for fast likelihoods follow
/// from this form.
class DephasingFamily {
public:
    DephasingFamily(CMatrix base, double rate);

    ProbeState at(double nbar) const;
    CMatrix matrix_at(double nbar) const;
    /// d rho / d nbar, elementwise -2 rate (n-m)^2 rho_{nm}.
    CMatrix derivative(double nbar) const;

    /// Compose with an nbar-independent Kerr rotation.
    DephasingFamily with_kerr(KerrStrength kerr) const;

    const CMatrix& base() const noexcept { return base_; }
    double rate() const noexcept { return rate_; }
    int dim() const noexcept { return static_cast<int>(base_.rows()); }

    /// exp(-rate d^2 (1 + 2 nbar)) for d = 0..dim-1.
    RVector band_weights(double nbar) const;

private:
    CMatrix base_;
    double rate_;
};

/// Family of the exact reduced optical state over nbar.
DephasingFamily probe_family(CoherentAmplitude alpha, CouplingParams cpl, FockCutoff cutoff);

/// Family of the small-tau approximation over nbar.
DephasingFamily small_tau_family(CoherentAmplitude alpha, CouplingParams cpl, FockCutoff cutoff);

/// Exact reduced optical state:
///   rho_{nm} = c_n c_m^* exp[i g^2 (n^2 - m^2)(tau - sin tau)]
///              * exp[g^2 (m-n)^2 (1 + 2 nbar)(cos tau - 1)].
ProbeState probe_state(CoherentAmplitude alpha, const OscillatorSpec& osc, CouplingParams cpl,
                       FockCutoff cutoff);

/// tau << 1 form: c_n c_m^* exp[-(g tau)^2 (m-n)^2 (1 + 2 nbar) / 2].
/// Valid only for small tau; not enforced.
ProbeState probe_state_small_tau(CoherentAmplitude alpha, const OscillatorSpec& osc, CouplingParams cpl,
                                 FockCutoff cutoff);

/// Mechanical cutoff used by bipartite_oracle when none is given:
/// ceil(20 (nbar + 1) + s^2 + 6 s sqrt(2 nbar + 1)), s = g n_eff sqrt(2 (1 - cos tau)),
/// with n_eff the largest photon number whose amplitude exceeds 1e-5.
FockCutoff oracle_mechanical_cutoff(CoherentAmplitude alpha, const OscillatorSpec& osc, CouplingParams cpl);

struct OracleReport {
    double leakage = 0.0;        // photon-weighted population in the top three mechanical levels
    double thermal_tail = 0.0;   // thermal weight beyond the mechanical cutoff
    double unitarity = 0.0;      // max |U U^dag - 1| over photon-number blocks
};

/// Brute-force reduced state: exponentiates the truncated joint Hamiltonian
///   H = b^dag b - g a^dag a (b^dag + b)   (units of Omega)
/// on light (x) mechanics, evolves rho_L(0) (x) rho_th(nbar) for time tau and
/// traces out the mechanics. Throws TruncationError when the mechanical
/// cutoff leaks more than 1e-8.
ProbeState bipartite_oracle(CoherentAmplitude alpha, const OscillatorSpec& osc, CouplingParams cpl,
                            FockCutoff cutoff_light, FockCutoff cutoff_mech, OracleReport* report = nullptr);

/// Random phase exp(-i theta n) rho exp(i theta n) averaged over a zero-mean
/// Gaussian theta: multiplies rho_{nm} by exp(-2 (n-m)^2 Delta^2), which is
/// the average for a phase of standard deviation 2 Delta.
ProbeState phase_diffusion_channel(const ProbeState& rho, DiffusionWidth width);

/// Width for which phase diffusion reproduces the thermal damping of
/// probe_state: 2 Delta^2 = g^2 (1 + 2 nbar)(1 - cos tau).
DiffusionWidth diffusion_equivalence_width(const OscillatorSpec& osc, CouplingParams cpl);

/// The nbar-independent part of probe_state: c_n c_m^* times the
/// photon-number-squared phase, with no damping.
ProbeState kerr_phased_coherent(CoherentAmplitude alpha, CouplingParams cpl, FockCutoff cutoff);

/// U_K rho U_K^dag: multiplies rho_{nm} by exp[-i (chi/2)(n^2 - m^2)].
ProbeState apply_kerr(const ProbeState& rho, KerrStrength kerr);

} // namespace optotherm
