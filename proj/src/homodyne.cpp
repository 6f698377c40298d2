#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "optotherm/errors.hpp"
#include "optotherm/metrology.hpp"

namespace optotherm {

namespace {

// Re(rho_{nm} e^{i phi (m-n)}); the imaginary part is antisymmetric and
// drops out of the real quadratic form.
RMatrix rotated_real_part(const CMatrix& rho, double phi) {
    RMatrix out(rho.rows(), rho.cols());
    for (Eigen::Index m = 0; m < rho.cols(); ++m) {
        for (Eigen::Index n = 0; n < rho.rows(); ++n) {
            out(n, m) = (rho(n, m) * std::polar(1.0, phi * static_cast<double>(m - n))).real();
        }
    }
    return out;
}

// Rowwise psi^T A psi for a table of Hermite functions.
RVector quadratic_rows(const RMatrix& psi, const RMatrix& a) {
    return (psi * a).cwiseProduct(psi).rowwise().sum();
}

double mean_photons(const CMatrix& rho) {
    double n = 0.0;
    for (Eigen::Index k = 0; k < rho.rows(); ++k) n += static_cast<double>(k) * rho(k, k).real();
    return std::max(n, 0.0);
}

// Band sums B_d(x) = sum_n rho_{n,n+d} psi_n(x) psi_{n+d}(x), so that
//   p(x; phi) = B_0(x) + 2 Re sum_{d>0} e^{i phi d} B_d(x)
// and each further phase costs one matrix-vector product.
CMatrix band_sums(const RMatrix& psi, const CMatrix& rho) {
    const Eigen::Index dim = rho.rows();
    CMatrix b(psi.rows(), dim);
    for (Eigen::Index d = 0; d < dim; ++d) {
        const RMatrix pairs = psi.leftCols(dim - d).cwiseProduct(psi.rightCols(dim - d));
        b.col(d) = pairs * rho.diagonal(d);
    }
    return b;
}

RVector density_from_bands(const CMatrix& bands, double phi) {
    CVector e(bands.cols());
    e[0] = 1.0;
    for (Eigen::Index d = 1; d < e.size(); ++d) e[d] = 2.0 * std::polar(1.0, phi * static_cast<double>(d));
    return (bands * e).real();
}

// Hermite tables and trapezoid weights over [-L, L], reused across phases.
struct Quadrature {
    RVector x;
    RVector w;
    RMatrix psi;

    Quadrature(double half_width, int points, FockCutoff cutoff) {
        x = RVector::LinSpaced(points, -half_width, half_width);
        const double h = 2.0 * half_width / (points - 1);
        w = RVector::Constant(points, h);
        w[0] = w[points - 1] = 0.5 * h;
        psi = hermite_table(x, cutoff);
    }

    struct Bands {
        CMatrix rho;
        CMatrix drho;
    };

    Bands bands(const CMatrix& rho, const CMatrix& drho) const { return {band_sums(psi, rho), band_sums(psi, drho)}; }

    double fisher(const Bands& b, double phi, double pdf_floor) const {
        const RVector p = density_from_bands(b.rho, phi);
        const RVector dp = density_from_bands(b.drho, phi);
        double f = 0.0;
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            if (p[i] > pdf_floor) f += w[i] * dp[i] * dp[i] / p[i];
        }
        return f;
    }
};

// Evaluates F_C on a grid and on its interval-doubled refinement.
struct DoubledQuadrature {
    Quadrature coarse;
    Quadrature fine;
    QuadratureSpec spec;

    DoubledQuadrature(const QuadratureSpec& s, double mean_n, FockCutoff cutoff)
        : coarse(half_width(s, mean_n), s.points, cutoff),
          fine(half_width(s, mean_n), 2 * s.points - 1, cutoff),
          spec(s) {
        if (s.points < 3) throw DomainError("QuadratureSpec: need at least 3 points");
    }

    static double half_width(const QuadratureSpec& s, double mean_n) {
        return s.half_width > 0.0 ? s.half_width : std::sqrt(2.0 * mean_n) + 8.0;
    }

    struct Bands {
        Quadrature::Bands coarse;
        Quadrature::Bands fine;
    };

    Bands bands(const CMatrix& rho, const CMatrix& drho) const {
        return {coarse.bands(rho, drho), fine.bands(rho, drho)};
    }

    // Returns (value, relative change); throws when the change exceeds rel_tol.
    std::pair<double, double> fisher(const Bands& b, double phi) const {
        const double f1 = coarse.fisher(b.coarse, phi, spec.pdf_floor);
        const double f2 = fine.fisher(b.fine, phi, spec.pdf_floor);
        const double change = std::abs(f2 - f1);
        const double rel = f2 > 0.0 ? change / f2 : change;
        if (change > spec.rel_tol * std::abs(f2) + 1e-14) {
            std::ostringstream msg;
            msg << "cfi_homodyne: quadrature not converged (F=" << f2 << ", doubling change " << rel
                << " relative); widen or refine the grid";
            throw PrecisionError(msg.str());
        }
        return {f2, rel};
    }

    std::pair<double, double> fisher(const CMatrix& rho, const CMatrix& drho, double phi) const {
        return fisher(bands(rho, drho), phi);
    }
};

FisherResult make_cfi_result(double value, double rel, const QuadratureSpec& quad, DerivativeScheme scheme) {
    FisherResult out;
    out.value = value;
    out.method = FisherMethod::homodyne_quadrature;
    out.numerics.quadrature_points = 2 * quad.points - 1;
    out.numerics.quadrature_error = rel;
    out.numerics.derivative = scheme;
    return out;
}

} // namespace

double homodyne_pdf(const ProbeState& rho, HomodyneSetting setting, double x) {
    const RVector psi = hermite_functions(x, rho.cutoff());
    return psi.dot(rotated_real_part(rho.matrix(), setting.phi_lo) * psi);
}

RVector homodyne_density(const CMatrix& rho, HomodyneSetting setting, const RVector& x) {
    const RMatrix psi = hermite_table(x, FockCutoff(static_cast<int>(rho.rows()) - 1));
    return quadratic_rows(psi, rotated_real_part(rho, setting.phi_lo));
}

RVector quadrature_grid(const QuadratureSpec& spec, double mean_photon_number, int points) {
    const double L = DoubledQuadrature::half_width(spec, mean_photon_number);
    return RVector::LinSpaced(points, -L, L);
}

FisherResult cfi_homodyne(const DephasingFamily& family, double nbar, HomodyneSetting setting,
                          const QuadratureSpec& quad) {
    const ProbeState rho = family.at(nbar);
    const DoubledQuadrature q(quad, mean_photons(rho.matrix()), rho.cutoff());
    const auto [value, rel] = q.fisher(rho.matrix(), family.derivative(nbar), setting.phi_lo);
    return make_cfi_result(value, rel, quad, DerivativeScheme::analytic);
}

FisherResult cfi_homodyne(const ProbeModel& model, double nbar, HomodyneSetting setting, const QuadratureSpec& quad) {
    FisherResult out = cfi_homodyne(model.family(), nbar, setting, quad);
    out.point = model.params(nbar, setting.phi_lo);
    return out;
}

FisherResult cfi_homodyne(const StateMap& builder, double nbar, HomodyneSetting setting, const QuadratureSpec& quad,
                          double dn) {
    const double h = dn > 0.0 ? dn : 1e-4 * (1.0 + nbar);
    const ProbeState rho = builder(nbar);
    CMatrix drho;
    if (nbar >= h) {
        drho = (builder(nbar + h).matrix() - builder(nbar - h).matrix()) / (2.0 * h);
    } else {
        drho = (-3.0 * rho.matrix() + 4.0 * builder(nbar + h).matrix() - builder(nbar + 2.0 * h).matrix()) / (2.0 * h);
    }
    const DoubledQuadrature q(quad, mean_photons(rho.matrix()), rho.cutoff());
    const auto [value, rel] = q.fisher(rho.matrix(), drho, setting.phi_lo);
    FisherResult out = make_cfi_result(value, rel, quad, DerivativeScheme::central_difference);
    out.point.nbar = nbar;
    out.point.phi_lo = setting.phi_lo;
    out.point.n_max = rho.dim() - 1;
    return out;
}

double distance_mod_pi(double phi) {
    const double r = std::fmod(std::abs(phi), kPi);
    return std::min(r, kPi - r);
}

PhiOptimum optimal_phi_lo(const ProbeModel& model, double nbar, const PhiOptions& opts) {
    if (opts.points < 3) throw DomainError("optimal_phi_lo: need at least 3 grid points");
    const DephasingFamily family = model.family();
    const ProbeState rho = family.at(nbar);
    const CMatrix drho = family.derivative(nbar);
    const DoubledQuadrature q(opts.quadrature, mean_photons(rho.matrix()), rho.cutoff());
    const auto bands = q.bands(rho.matrix(), drho);

    const int n = opts.points;
    const double h = kPi / n;
    std::vector<double> f(n);
    for (int k = 0; k < n; ++k) f[k] = q.fisher(bands, h * k).first;
    const int best = static_cast<int>(std::max_element(f.begin(), f.end()) - f.begin());

    PhiOptimum out;
    out.phi_star = h * best;
    out.fc = f[best];
    // Parabola through the neighbours; F_C(phi + pi) = F_C(phi) closes the grid.
    const double fl = f[(best + n - 1) % n];
    const double fr = f[(best + 1) % n];
    const double curvature = fl - 2.0 * f[best] + fr;
    if (curvature < 0.0) {
        const double offset = std::clamp(0.5 * h * (fl - fr) / curvature, -h, h);
        const double phi = h * best + offset;
        const double v = q.fisher(bands, phi).first;
        if (v > out.fc) {
            out.fc = v;
            out.phi_star = phi;
        }
    }
    out.phi_star = std::fmod(out.phi_star + kPi, kPi);
    out.fq = qfi_from(rho.matrix(), drho).value;
    out.ratio = out.fq > 0.0 ? out.fc / out.fq : 0.0;
    return out;
}

std::vector<double> sample_homodyne(const ProbeState& rho, HomodyneSetting setting, int count, std::uint64_t seed) {
    if (count < 0) throw DomainError("sample_homodyne: count must be >= 0");
    std::vector<double> out;
    if (count == 0) return out;
    out.reserve(count);

    constexpr int kTablePoints = 20001;
    const double L = std::sqrt(2.0 * mean_photons(rho.matrix())) + 10.0;
    const RVector x = RVector::LinSpaced(kTablePoints, -L, L);
    const RVector p = homodyne_density(rho.matrix(), setting, x).cwiseMax(0.0);
    const double h = x[1] - x[0];
    std::vector<double> cdf(kTablePoints, 0.0);
    for (int i = 1; i < kTablePoints; ++i) cdf[i] = cdf[i - 1] + 0.5 * h * (p[i - 1] + p[i]);
    const double total = cdf.back();
    for (double& c : cdf) c /= total;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (int s = 0; s < count; ++s) {
        const double u = uniform(rng);
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const auto j = std::clamp<std::ptrdiff_t>(it - cdf.begin() - 1, 0, kTablePoints - 2);
        const double width = cdf[j + 1] - cdf[j];
        const double frac = width > 0.0 ? (u - cdf[j]) / width : 0.5;
        out.push_back(x[j] + frac * h);
    }
    return out;
}

} // namespace optotherm
