#pragma once

// Wigner function of Fock-basis density matrices in the quadratures
// q = (a + a^dag)/sqrt 2, p = -i (a - a^dag)/sqrt 2 (vacuum peak 1/pi).

#include "optotherm/hilbert.hpp"

namespace optotherm {

struct WignerGridSpec {
    double q_min = -5.0;
    double q_max = 5.0;
    double p_min = -5.0;
    double p_max = 5.0;
    int q_points = 201;
    int p_points = 201;

    /// Square grid [-(sqrt 2 a + 5), sqrt 2 a + 5]^2 with 201 x 201 points.
    static WignerGridSpec for_coherent(double alpha, int points = 201);
};

struct PhaseSpaceGrid {
    RVector q;
    RVector p;
    RMatrix values;  // values(i, j) = W(q[i], p[j])
    double imag_residue = 0.0;
    double normalization = 0.0;  // sum W dq dp
};

/// W(q, p) = sum_{n,m} rho_{nm} W_{mn}(q, p) with Laguerre kernels.
/// Throws PrecisionError when the normalization deficit exceeds 1e-4
/// (grid does not cover the state).
PhaseSpaceGrid wigner_grid(const ProbeState& rho, const WignerGridSpec& spec);

/// Single-point Laguerre evaluation.
double wigner_point(const ProbeState& rho, double q, double p);

double wigner_min(const PhaseSpaceGrid& grid);

/// (1/pi) int <q + x|rho|q - x> e^{-2 i p x} dx by direct quadrature with
/// Hermite functions; independent check of the Laguerre path.
double wigner_line_integral_oracle(const ProbeState& rho, double q, double p, int points = 4001);

} // namespace optotherm
