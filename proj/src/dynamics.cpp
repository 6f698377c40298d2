#include "optotherm/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "optotherm/errors.hpp"

namespace optotherm {

CouplingParams::CouplingParams(double g_, double tau_) : g(g_), tau(tau_) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw DomainError("CouplingParams: g must be finite and >= 0");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw DomainError("CouplingParams: tau must be finite and >= 0");
}

Complex CouplingParams::eta() const { return 1.0 - std::exp(Complex(0.0, -tau)); }

double CouplingParams::kerr_phase_rate() const { return tau - std::sin(tau); }

double CouplingParams::diffusion_rate() const { return g * g * (1.0 - std::cos(tau)); }

DiffusionWidth::DiffusionWidth(double d) : delta(d) {
    if (!(d >= 0.0)) throw DomainError("DiffusionWidth: Delta must be >= 0");
}

DephasingFamily::DephasingFamily(CMatrix base, double rate) : base_(std::move(base)), rate_(rate) {
    if (base_.rows() != base_.cols()) throw ContractViolation("DephasingFamily: base must be square");
    if (!(rate_ >= 0.0)) throw DomainError("DephasingFamily: rate must be >= 0");
}

RVector DephasingFamily::band_weights(double nbar) const {
    RVector w(dim());
    const double s = rate_ * (1.0 + 2.0 * nbar);
    for (int d = 0; d < dim(); ++d) w[d] = std::exp(-s * d * d);
    return w;
}

CMatrix DephasingFamily::matrix_at(double nbar) const {
    const RVector w = band_weights(nbar);
    CMatrix rho(dim(), dim());
    for (int m = 0; m < dim(); ++m) {
        for (int n = 0; n < dim(); ++n) rho(n, m) = base_(n, m) * w[std::abs(n - m)];
    }
    return rho;
}

ProbeState DephasingFamily::at(double nbar) const {
    if (!(nbar >= 0.0)) throw DomainError("DephasingFamily::at: nbar must be >= 0");
    return ProbeState(matrix_at(nbar));
}

CMatrix DephasingFamily::derivative(double nbar) const {
    CMatrix rho = matrix_at(nbar);
    for (int m = 0; m < dim(); ++m) {
        for (int n = 0; n < dim(); ++n) rho(n, m) *= -2.0 * rate_ * (n - m) * (n - m);
    }
    return rho;
}

namespace {

// exp[-i (chi/2)(n^2 - m^2)] applied elementwise.
CMatrix kerr_rotated(const CMatrix& rho, double chi) {
    CMatrix out(rho.rows(), rho.cols());
    for (Eigen::Index m = 0; m < rho.cols(); ++m) {
        for (Eigen::Index n = 0; n < rho.rows(); ++n) {
            const double phase = -0.5 * chi * static_cast<double>(n * n - m * m);
            out(n, m) = rho(n, m) * std::polar(1.0, phase);
        }
    }
    return out;
}

// c_n c_m^* exp[i g^2 (n^2 - m^2)(tau - sin tau)], lower triangle mirrored so
// the result is Hermitian bit for bit.
CMatrix phased_projector(const CVector& c, double phase_rate) {
    const Eigen::Index dim = c.size();
    CMatrix rho(dim, dim);
    for (Eigen::Index m = 0; m < dim; ++m) {
        for (Eigen::Index n = 0; n <= m; ++n) {
            const double phase = phase_rate * static_cast<double>(n * n - m * m);
            rho(n, m) = c[n] * std::conj(c[m]) * std::polar(1.0, phase);
            rho(m, n) = std::conj(rho(n, m));
        }
    }
    return rho;
}

} // namespace

DephasingFamily DephasingFamily::with_kerr(KerrStrength kerr) const {
    return DephasingFamily(kerr_rotated(base_, kerr.chi), rate_);
}

DephasingFamily probe_family(CoherentAmplitude alpha, CouplingParams cpl, FockCutoff cutoff) {
    const CVector c = coherent_coefficients(alpha, cutoff);
    return DephasingFamily(phased_projector(c, cpl.g * cpl.g * cpl.kerr_phase_rate()), cpl.diffusion_rate());
}

DephasingFamily small_tau_family(CoherentAmplitude alpha, CouplingParams cpl, FockCutoff cutoff) {
    const CVector c = coherent_coefficients(alpha, cutoff);
    const double gt = cpl.g * cpl.tau;
    return DephasingFamily(phased_projector(c, 0.0), 0.5 * gt * gt);
}

ProbeState probe_state(CoherentAmplitude alpha, const OscillatorSpec& osc, CouplingParams cpl, FockCutoff cutoff) {
    return probe_family(alpha, cpl, cutoff).at(osc.nbar());
}

ProbeState probe_state_small_tau(CoherentAmplitude alpha, const OscillatorSpec& osc, CouplingParams cpl,
                                 FockCutoff cutoff) {
    return small_tau_family(alpha, cpl, cutoff).at(osc.nbar());
}

ProbeState kerr_phased_coherent(CoherentAmplitude alpha, CouplingParams cpl, FockCutoff cutoff) {
    const CVector c = coherent_coefficients(alpha, cutoff);
    return ProbeState(phased_projector(c, cpl.g * cpl.g * cpl.kerr_phase_rate()));
}

ProbeState phase_diffusion_channel(const ProbeState& rho, DiffusionWidth width) {
    const double d2 = width.delta * width.delta;
    CMatrix out = rho.matrix();
    for (int m = 0; m < rho.dim(); ++m) {
        for (int n = 0; n < rho.dim(); ++n) out(n, m) *= std::exp(-2.0 * (n - m) * (n - m) * d2);
    }
    return ProbeState(std::move(out));
}

DiffusionWidth diffusion_equivalence_width(const OscillatorSpec& osc, CouplingParams cpl) {
    const double two_delta_sq = (1.0 + 2.0 * osc.nbar()) * cpl.diffusion_rate();
    return DiffusionWidth(std::sqrt(0.5 * two_delta_sq));
}

ProbeState apply_kerr(const ProbeState& rho, KerrStrength kerr) {
    return ProbeState(kerr_rotated(rho.matrix(), kerr.chi));
}

namespace {

constexpr double kOracleAmplitudeFloor = 1e-10;
constexpr double kOracleLeakageLimit = 1e-8;

int significant_photon_number(const CVector& c, double floor) {
    int n_eff = 0;
    for (int n = 0; n < c.size(); ++n) {
        if (std::abs(c[n]) > floor) n_eff = n;
    }
    return n_eff;
}

} // namespace

FockCutoff oracle_mechanical_cutoff(CoherentAmplitude alpha, const OscillatorSpec& osc, CouplingParams cpl) {
    const CVector c = coherent_coefficients(alpha, FockCutoff::for_coherent(alpha.alpha));
    // amplitude 1e-5 is photon-number weight 1e-10, below the leakage budget
    const int n_eff = significant_photon_number(c, 1e-5);
    // mechanical displacement |g n (1 - e^{-i tau})|
    const double shift = cpl.g * n_eff * std::sqrt(2.0 * (1.0 - std::cos(cpl.tau)));
    const double nbar = osc.nbar();
    const double n_mech = 20.0 * (nbar + 1.0) + shift * shift + 6.0 * shift * std::sqrt(2.0 * nbar + 1.0);
    return FockCutoff(std::max(10, static_cast<int>(std::ceil(n_mech))));
}

ProbeState bipartite_oracle(CoherentAmplitude alpha, const OscillatorSpec& osc, CouplingParams cpl,
                            FockCutoff cutoff_light, FockCutoff cutoff_mech, OracleReport* report) {
    const CVector c = coherent_coefficients(alpha, cutoff_light);
    const int n_light = cutoff_light.dim();
    const int n_mech = cutoff_mech.dim();
    const double nbar = osc.nbar();

    // Thermal mixture sum_k p_k |k><k|, p_k = nbar^k / (1 + nbar)^{k+1}.
    std::vector<double> p;
    {
        const double q = nbar / (1.0 + nbar);
        double pk = 1.0 / (1.0 + nbar);
        double kept = 0.0;
        for (int k = 0; k < n_mech && pk > 1e-16; ++k) {
            p.push_back(pk);
            kept += pk;
            pk *= q;
        }
        if (report) report->thermal_tail = std::max(0.0, 1.0 - kept);
    }
    const int n_thermal = static_cast<int>(p.size());
    const int guard = 3;  // top mechanical levels counted as leaked population

    // The joint Hamiltonian commutes with a^dag a, so exp(-i H tau) is block
    // diagonal: one mechanical propagator U_n per photon number n, generated by
    // the tridiagonal H_n = b^dag b - g n (b + b^dag).
    std::vector<CMatrix> evolved(n_light);  // columns U_n |k>, k < n_thermal
    double leakage = 0.0;
    double unitarity = 0.0;
    RVector diag(n_mech);
    RVector sub(n_mech - 1);
    for (int j = 0; j < n_mech; ++j) diag[j] = j;
    for (int n = 0; n < n_light; ++n) {
        if (std::abs(c[n]) <= kOracleAmplitudeFloor) continue;
        for (int j = 0; j + 1 < n_mech; ++j) sub[j] = -cpl.g * n * std::sqrt(static_cast<double>(j + 1));
        Eigen::SelfAdjointEigenSolver<RMatrix> solver;
        solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        if (solver.info() != Eigen::Success) throw PrecisionError("bipartite_oracle: eigensolver failed");
        const RMatrix& vecs = solver.eigenvectors();
        CVector phases(n_mech);
        for (int j = 0; j < n_mech; ++j) phases[j] = std::polar(1.0, -solver.eigenvalues()[j] * cpl.tau);
        // U_n |k> = V diag(e^{-i E tau}) V^T |k>
        CMatrix rows = vecs.topRows(n_thermal).transpose().cast<Complex>();
        rows = phases.asDiagonal() * rows;
        CMatrix psi = vecs.cast<Complex>() * rows;
        const CMatrix gram = psi.adjoint() * psi;
        unitarity = std::max(unitarity, (gram - CMatrix::Identity(n_thermal, n_thermal)).cwiseAbs().maxCoeff());
        double top = 0.0;
        for (int k = 0; k < n_thermal; ++k) top += p[k] * psi.col(k).tail(guard).squaredNorm();
        leakage += std::norm(c[n]) * top;
        evolved[n] = std::move(psi);
    }
    if (report) {
        report->leakage = leakage;
        report->unitarity = unitarity;
    }
    if (unitarity > 1e-10) {
        std::ostringstream msg;
        msg << "bipartite_oracle: propagator unitarity residual " << unitarity;
        throw PrecisionError(msg.str());
    }
    const double thermal_tail = std::pow(nbar / (1.0 + nbar), n_thermal);
    if (leakage > kOracleLeakageLimit || (nbar > 0.0 && thermal_tail > kOracleLeakageLimit)) {
        std::ostringstream msg;
        msg << "bipartite_oracle: mechanical cutoff n_max=" << cutoff_mech.n_max() << " leaks " << leakage
            << " (thermal tail " << thermal_tail << "); increase the mechanical cutoff";
        throw TruncationError(msg.str());
    }

    // rho_L(tau)_{nm} = c_n c_m^* sum_k p_k <psi_{m,k} | psi_{n,k}>
    CMatrix rho = CMatrix::Zero(n_light, n_light);
    for (int m = 0; m < n_light; ++m) {
        if (evolved[m].size() == 0) continue;
        for (int n = m; n < n_light; ++n) {
            if (evolved[n].size() == 0) continue;
            Complex overlap = 0.0;
            for (int k = 0; k < n_thermal; ++k) overlap += p[k] * evolved[m].col(k).dot(evolved[n].col(k));
            rho(n, m) = c[n] * std::conj(c[m]) * overlap;
            rho(m, n) = std::conj(rho(n, m));
        }
    }
    return ProbeState(std::move(rho));
}

} // namespace optotherm
