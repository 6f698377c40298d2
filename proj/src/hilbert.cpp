#include "optotherm/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "optotherm/errors.hpp"

namespace optotherm {

FockCutoff::FockCutoff(int n_max) : n_max_(n_max) {
    if (n_max < 1) {
        throw DomainError("FockCutoff: n_max must be >= 1, got " + std::to_string(n_max));
    }
}

FockCutoff FockCutoff::for_coherent(double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw DomainError("FockCutoff::for_coherent: alpha must be finite and >= 0");
    }
    return FockCutoff(static_cast<int>(std::ceil(alpha * alpha + 8.0 * alpha + 10.0)));
}

CoherentAmplitude::CoherentAmplitude(double a) : alpha(a) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
        throw DomainError("CoherentAmplitude: alpha must be finite and >= 0");
    }
}

OscillatorSpec::OscillatorSpec(double nbar) : nbar_(nbar) {
    if (!(nbar >= 0.0) || !std::isfinite(nbar)) {
        throw DomainError("OscillatorSpec: nbar must be finite and >= 0");
    }
}

OscillatorSpec OscillatorSpec::from_temperature(double kelvin, double omega) {
    OscillatorSpec spec(nbar_from_temperature(kelvin, omega));
    spec.kelvin_ = kelvin;
    spec.omega_ = omega;
    return spec;
}

double nbar_from_ratio(double x) {
    if (!(x > 0.0)) {
        throw DomainError("nbar_from_ratio: hbar*Omega/(k_B T) must be > 0");
    }
    // expm1 keeps precision in the classical limit x -> 0.
    return 1.0 / std::expm1(x);
}

double nbar_from_temperature(double kelvin, double omega) {
    if (!(kelvin > 0.0) || !(omega > 0.0)) {
        throw DomainError("nbar_from_temperature: T and Omega must be > 0");
    }
    return nbar_from_ratio(kHbar * omega / (kBoltzmann * kelvin));
}

double temperature_from_nbar(double nbar, double omega) {
    if (!(nbar > 0.0) || !(omega > 0.0)) {
        throw DomainError("temperature_from_nbar: nbar and Omega must be > 0");
    }
    return kHbar * omega / (kBoltzmann * std::log1p(1.0 / nbar));
}

double dnbar_dtemperature(double kelvin, double omega) {
    if (!(kelvin > 0.0) || !(omega > 0.0)) {
        throw DomainError("dnbar_dtemperature: T and Omega must be > 0");
    }
    const double x = kHbar * omega / (kBoltzmann * kelvin);
    const double n = nbar_from_ratio(x);
    // d/dT [1/(e^x - 1)] with x = c/T  ->  n (n + 1) x / T
    return n * (n + 1.0) * x / kelvin;
}

CVector coherent_coefficients(CoherentAmplitude alpha, FockCutoff cutoff, double tail_tol) {
    const double a = alpha.alpha;
    CVector c(cutoff.dim());
    double amp = std::exp(-0.5 * a * a);
    double norm = 0.0;
    for (int n = 0; n < cutoff.dim(); ++n) {
        c[n] = amp;
        norm += amp * amp;
        amp *= a / std::sqrt(static_cast<double>(n + 1));
    }
    if (1.0 - norm > tail_tol) {
        std::ostringstream msg;
        msg << "coherent_coefficients: cutoff n_max=" << cutoff.n_max() << " leaves tail mass "
            << (1.0 - norm) << " > " << tail_tol << " for alpha=" << a;
        throw TruncationError(msg.str());
    }
    return c;
}

namespace {

// psi_0 = pi^{-1/4} e^{-x^2/2}; psi_{n+1} = sqrt(2/(n+1)) x psi_n - sqrt(n/(n+1)) psi_{n-1}
template <typename Out>
void hermite_recurrence(double x, int dim, Out&& out) {
    static const double kPiQuarter = std::pow(kPi, -0.25);
    double prev = 0.0;
    double cur = kPiQuarter * std::exp(-0.5 * x * x);
    out(0, cur);
    for (int n = 0; n + 1 < dim; ++n) {
        const double next = std::sqrt(2.0 / (n + 1)) * x * cur - std::sqrt(static_cast<double>(n) / (n + 1)) * prev;
        prev = cur;
        cur = next;
        out(n + 1, cur);
    }
}

} // namespace

RVector hermite_functions(double x, FockCutoff cutoff) {
    RVector psi(cutoff.dim());
    hermite_recurrence(x, cutoff.dim(), [&](int n, double v) { psi[n] = v; });
    return psi;
}

RMatrix hermite_table(const RVector& x, FockCutoff cutoff) {
    RMatrix table(x.size(), cutoff.dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        hermite_recurrence(x[i], cutoff.dim(), [&](int n, double v) { table(i, n) = v; });
    }
    return table;
}

ProbeState::ProbeState(CMatrix elements) : elements_(std::move(elements)) {
    if (elements_.rows() != elements_.cols() || elements_.rows() < 2) {
        throw ContractViolation("ProbeState: matrix must be square with dim >= 2");
    }
    if (!elements_.allFinite()) {
        throw ContractViolation("ProbeState: non-finite matrix element");
    }
    const double herm = max_abs_diff(elements_, elements_.adjoint());
    if (herm > StateTolerance::hermitian) {
        throw ContractViolation("ProbeState: not Hermitian (residual " + std::to_string(herm) + ")");
    }
    const double tr = trace();
    if (std::abs(tr - 1.0) > StateTolerance::trace) {
        std::ostringstream msg;
        msg << "ProbeState: trace " << tr << " deviates from 1 by more than "
            << StateTolerance::trace << "; increase the Fock cutoff";
        throw TruncationError(msg.str());
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(elements_, Eigen::EigenvaluesOnly);
    min_eigenvalue_ = solver.eigenvalues().minCoeff();
    if (min_eigenvalue_ < StateTolerance::psd) {
        throw ContractViolation("ProbeState: not positive semidefinite (min eigenvalue " +
                                std::to_string(min_eigenvalue_) + ")");
    }
}

ProbeState ProbeState::pure(const CVector& amplitudes) {
    return ProbeState(amplitudes * amplitudes.adjoint());
}

double ProbeState::trace() const { return elements_.trace().real(); }

double ProbeState::mean_photon_number() const {
    double n = 0.0;
    for (int k = 0; k < dim(); ++k) n += k * elements_(k, k).real();
    return n;
}

CMatrix Spectrum::reconstruct() const {
    return vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint();
}

Spectrum eigendecompose_hermitian(const CMatrix& rho) {
    if (rho.rows() != rho.cols()) {
        throw ContractViolation("eigendecompose_hermitian: matrix must be square");
    }
    const double herm = max_abs_diff(rho, rho.adjoint());
    if (herm > StateTolerance::hermitian) {
        throw ContractViolation("eigendecompose_hermitian: matrix is not Hermitian (residual " +
                                std::to_string(herm) + ")");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho);
    if (solver.info() != Eigen::Success) {
        throw ContractViolation("eigendecompose_hermitian: eigensolver did not converge");
    }
    const Eigen::Index n = rho.rows();
    Spectrum spec;
    spec.values.resize(n);
    spec.vectors.resize(n, n);
    // Eigen sorts ascending.
    for (Eigen::Index i = 0; i < n; ++i) {
        spec.values[i] = solver.eigenvalues()[n - 1 - i];
        spec.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
    spec.raw_min = spec.values[n - 1];
    for (Eigen::Index i = 0; i < n; ++i) {
        if (spec.values[i] < 0.0 && spec.values[i] >= StateTolerance::psd) {
            spec.values[i] = 0.0;
            ++spec.clipped;
        }
    }
    return spec;
}

Spectrum eigendecompose_hermitian(const ProbeState& rho) { return eigendecompose_hermitian(rho.matrix()); }

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ContractViolation("max_abs_diff: shape mismatch");
    }
    return (a - b).cwiseAbs().maxCoeff();
}

} // namespace optotherm
