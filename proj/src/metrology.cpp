#include "optotherm/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "optotherm/errors.hpp"

namespace optotherm {

std::string to_string(FisherMethod m) {
    switch (m) {
    case FisherMethod::sld_spectral: return "sld_spectral";
    case FisherMethod::homodyne_quadrature: return "homodyne_quadrature";
    case FisherMethod::gaussian_covariance: return "gaussian_covariance";
    case FisherMethod::gaussian_generaldyne: return "gaussian_generaldyne";
    }
    return "unknown";
}

std::string to_string(DerivativeScheme s) {
    return s == DerivativeScheme::analytic ? "analytic" : "central_difference";
}

ProbeModel::ProbeModel(double alpha_, double g, double tau, double chi, std::optional<FockCutoff> cutoff_)
    : alpha(alpha_), coupling(g, tau), kerr{chi}, cutoff(cutoff_.value_or(FockCutoff::for_coherent(alpha_))) {}

DephasingFamily ProbeModel::family() const {
    DephasingFamily fam = probe_family(alpha, coupling, cutoff);
    return kerr.chi == 0.0 ? fam : fam.with_kerr(kerr);
}

SystemParams ProbeModel::params(double nbar, double phi_lo) const {
    SystemParams p;
    p.alpha = alpha.alpha;
    p.nbar = nbar;
    p.g = coupling.g;
    p.tau = coupling.tau;
    p.chi = kerr.chi;
    p.phi_lo = phi_lo;
    p.n_max = cutoff.n_max();
    return p;
}

ProbeModel ProbeModel::with_cutoff(FockCutoff c) const {
    return ProbeModel(alpha.alpha, coupling.g, coupling.tau, kerr.chi, c);
}

FisherResult qfi_from(const CMatrix& rho, const CMatrix& drho, double eigenvalue_floor) {
    const Spectrum spec = eigendecompose_hermitian(rho);
    const CMatrix d = spec.vectors.adjoint() * drho * spec.vectors;
    const Eigen::Index n = rho.rows();
    double fq = 0.0;
    int excluded = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = spec.values[i] + spec.values[j];
            if (s > eigenvalue_floor) {
                fq += std::norm(d(i, j)) / s;
            } else {
                ++excluded;
            }
        }
    }
    fq *= 2.0;
    if (fq < -1e-10) {
        std::ostringstream msg;
        msg << "qfi: negative quantum Fisher information " << fq;
        throw PrecisionError(msg.str());
    }
    FisherResult out;
    out.value = std::max(fq, 0.0);
    out.method = FisherMethod::sld_spectral;
    out.numerics.eigenvalue_floor = eigenvalue_floor;
    out.numerics.excluded_pairs = excluded;
    out.numerics.derivative = DerivativeScheme::analytic;
    return out;
}

FisherResult qfi(const DephasingFamily& family, double nbar, const QfiOptions& opts) {
    const ProbeState rho = family.at(nbar);
    return qfi_from(rho.matrix(), family.derivative(nbar), opts.eigenvalue_floor);
}

FisherResult qfi(const ProbeModel& model, double nbar, const QfiOptions& opts) {
    FisherResult out = qfi(model.family(), nbar, opts);
    out.point = model.params(nbar);
    return out;
}

namespace {

double default_step(double nbar, double dn) { return dn > 0.0 ? dn : 1e-4 * (1.0 + nbar); }

// Second-order derivative of a matrix-valued map; one-sided near nbar = 0.
CMatrix finite_difference(const StateMap& builder, double nbar, double h) {
    if (nbar >= h) {
        return (builder(nbar + h).matrix() - builder(nbar - h).matrix()) / (2.0 * h);
    }
    return (-3.0 * builder(nbar).matrix() + 4.0 * builder(nbar + h).matrix() - builder(nbar + 2.0 * h).matrix()) /
           (2.0 * h);
}

} // namespace

FisherResult qfi(const StateMap& builder, double nbar, const QfiOptions& opts) {
    const double h = default_step(nbar, opts.dn);
    const ProbeState rho = builder(nbar);
    FisherResult out = qfi_from(rho.matrix(), finite_difference(builder, nbar, h), opts.eigenvalue_floor);
    out.numerics.derivative = DerivativeScheme::central_difference;
    out.point.nbar = nbar;
    out.point.n_max = rho.dim() - 1;
    return out;
}

CMatrix symmetric_log_derivative(const CMatrix& rho, const CMatrix& drho, double eigenvalue_floor) {
    const Spectrum spec = eigendecompose_hermitian(rho);
    CMatrix d = spec.vectors.adjoint() * drho * spec.vectors;
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
        for (Eigen::Index i = 0; i < d.rows(); ++i) {
            const double s = spec.values[i] + spec.values[j];
            d(i, j) = s > eigenvalue_floor ? 2.0 * d(i, j) / s : Complex(0.0);
        }
    }
    return spec.vectors * d * spec.vectors.adjoint();
}

GmaxResult find_gmax(double alpha, double nbar, double tau, const GmaxOptions& opts) {
    if (!(opts.g_hi > opts.g_lo) || opts.g_lo < 0.0 || opts.scan_points < 3) {
        throw DomainError("find_gmax: need 0 <= g_lo < g_hi and at least 3 scan points");
    }
    const FockCutoff cutoff = opts.cutoff.value_or(FockCutoff::for_coherent(alpha));
    auto objective = [&](double g) { return qfi(ProbeModel(alpha, g, tau, 0.0, cutoff), nbar).value; };

    const int n = opts.scan_points;
    const double step = (opts.g_hi - opts.g_lo) / (n - 1);
    std::vector<double> f(n);
    for (int i = 0; i < n; ++i) f[i] = objective(opts.g_lo + step * i);
    const double fmax = *std::max_element(f.begin(), f.end());
    int best = 0;
    while (f[best] < fmax - 1e-9) ++best;

    GmaxResult out;
    out.on_boundary = (best == 0 || best == n - 1);

    // Golden-section search on the bracketing cells.
    double a = opts.g_lo + step * std::max(best - 1, 0);
    double b = opts.g_lo + step * std::min(best + 1, n - 1);
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = objective(c);
    double fd = objective(d);
    while (b - a > opts.g_tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = objective(d);
        }
    }
    out.g_max = opts.g_lo + step * best;
    out.fq_max = f[best];
    const double g_mid = 0.5 * (a + b);
    const double f_mid = objective(g_mid);
    for (auto [g, v] : {std::pair{c, fc}, std::pair{d, fd}, std::pair{g_mid, f_mid}}) {
        if (v > out.fq_max) {
            out.g_max = g;
            out.fq_max = v;
        }
    }
    return out;
}

} // namespace optotherm
