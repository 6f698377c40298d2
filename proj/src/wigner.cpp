#include "optotherm/wigner.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "optotherm/errors.hpp"

namespace optotherm {

WignerGridSpec WignerGridSpec::for_coherent(double alpha, int points) {
    const double half = std::sqrt(2.0) * alpha + 5.0;
    return WignerGridSpec{-half, half, -half, half, points, points};
}

namespace {

// Fock-basis kernels of |m><n| (m = n + k) at one phase-space point:
//   (1/pi) (-1)^n sqrt(n!/m!) (sqrt2 (q - ip))^k e^{-r^2} L_n^{(k)}(2 r^2).
// The prefactor is assembled in log space so large n and r stay finite.
class LaguerreKernel {
public:
    explicit LaguerreKernel(int dim) : dim_(dim), log_fact_(dim + 1), lag_(dim) {
        for (int n = 0; n <= dim; ++n) log_fact_[n] = std::lgamma(n + 1.0);
    }

    // Returns sum_{n,m} rho_{nm} W_{|n><m|}(q, p); the imaginary part of the
    // sum is written to imag.
    double evaluate(const CMatrix& rho, double q, double p, double& imag) {
        const double r2 = q * q + p * p;
        const double y = 2.0 * r2;
        const double log_abs_z = r2 > 0.0 ? 0.5 * std::log(y) : 0.0;
        const double theta = std::atan2(-p, q);  // arg of q - ip
        Complex total = 0.0;
        for (int k = 0; k < dim_; ++k) {
            if (k > 0 && r2 == 0.0) break;
            const Complex phase = std::polar(1.0, k * theta);
            laguerre(k, y, dim_ - k);
            for (int n = 0; n + k < dim_; ++n) {
                const int m = n + k;
                const double log_pref = 0.5 * (log_fact_[n] - log_fact_[m]) + k * log_abs_z - r2;
                const double sign = (n % 2 == 0) ? 1.0 : -1.0;
                const Complex kernel = (sign * std::exp(log_pref) * lag_[n] / kPi) * phase;
                if (k == 0) {
                    total += rho(n, n) * kernel;
                } else {
                    total += rho(m, n) * kernel + rho(n, m) * std::conj(kernel);
                }
            }
        }
        imag = total.imag();
        return total.real();
    }

private:
    // L_n^{(k)}(y) for n < count.
    void laguerre(int k, double y, int count) {
        lag_[0] = 1.0;
        if (count > 1) lag_[1] = 1.0 + k - y;
        for (int n = 1; n + 1 < count; ++n) {
            lag_[n + 1] = ((2.0 * n + 1.0 + k - y) * lag_[n] - (n + k) * lag_[n - 1]) / (n + 1.0);
        }
    }

    int dim_;
    std::vector<double> log_fact_;
    std::vector<double> lag_;
};

RVector trapezoid_weights(int points, double h) {
    RVector w = RVector::Constant(points, h);
    w[0] = w[points - 1] = 0.5 * h;
    return w;
}

} // namespace

PhaseSpaceGrid wigner_grid(const ProbeState& rho, const WignerGridSpec& spec) {
    if (spec.q_points < 2 || spec.p_points < 2 || !(spec.q_max > spec.q_min) || !(spec.p_max > spec.p_min)) {
        throw DomainError("wigner_grid: invalid grid specification");
    }
    PhaseSpaceGrid grid;
    grid.q = RVector::LinSpaced(spec.q_points, spec.q_min, spec.q_max);
    grid.p = RVector::LinSpaced(spec.p_points, spec.p_min, spec.p_max);
    grid.values.resize(spec.q_points, spec.p_points);

    double residue = 0.0;
#pragma omp parallel for reduction(max : residue) schedule(static)
    for (int i = 0; i < spec.q_points; ++i) {
        LaguerreKernel kernel(rho.dim());
        for (int j = 0; j < spec.p_points; ++j) {
            double imag = 0.0;
            grid.values(i, j) = kernel.evaluate(rho.matrix(), grid.q[i], grid.p[j], imag);
            residue = std::max(residue, std::abs(imag));
        }
    }
    grid.imag_residue = residue;
    if (residue > 1e-10) {
        std::ostringstream msg;
        msg << "wigner_grid: imaginary residue " << residue << " exceeds 1e-10";
        throw PrecisionError(msg.str());
    }

    const double hq = grid.q[1] - grid.q[0];
    const double hp = grid.p[1] - grid.p[0];
    grid.normalization =
        trapezoid_weights(spec.q_points, hq).dot(grid.values * trapezoid_weights(spec.p_points, hp));
    if (std::abs(1.0 - grid.normalization) > 1e-4) {
        std::ostringstream msg;
        msg << "wigner_grid: grid does not cover the state (integral " << grid.normalization << ")";
        throw PrecisionError(msg.str());
    }
    return grid;
}

double wigner_point(const ProbeState& rho, double q, double p) {
    LaguerreKernel kernel(rho.dim());
    double imag = 0.0;
    return kernel.evaluate(rho.matrix(), q, p, imag);
}

double wigner_min(const PhaseSpaceGrid& grid) { return grid.values.minCoeff(); }

double wigner_line_integral_oracle(const ProbeState& rho, double q, double p, int points) {
    const FockCutoff cutoff = rho.cutoff();
    const double half = std::sqrt(2.0 * rho.dim()) + 8.0 + std::abs(q);
    const RVector x = RVector::LinSpaced(points, -half, half);
    const RMatrix plus = hermite_table((x.array() + q).matrix(), cutoff);
    const RMatrix minus = hermite_table((q - x.array()).matrix(), cutoff);
    // <q+x|rho|q-x> = sum_{n,m} psi_n(q+x) rho_{nm} psi_m(q-x)
    const CMatrix left = plus.cast<Complex>() * rho.matrix();
    const double h = x[1] - x[0];
    Complex acc = 0.0;
    for (int i = 0; i < points; ++i) {
        const Complex kernel = left.row(i) * minus.row(i).transpose().cast<Complex>();
        const double w = (i == 0 || i == points - 1) ? 0.5 * h : h;
        acc += w * kernel * std::polar(1.0, -2.0 * p * x[i]);
    }
    return acc.real() / kPi;
}

} // namespace optotherm
