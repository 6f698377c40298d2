#include <doctest.h>

#include <cmath>
#include <numeric>

#include "optotherm/errors.hpp"
#include "optotherm/metrology.hpp"

using namespace optotherm;

namespace {

CMatrix psd_sqrt(const CMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
    const RVector v = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * v.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

// Tr sqrt(sqrt(rho) sigma sqrt(rho))
double root_fidelity(const CMatrix& rho, const CMatrix& sigma) {
    const CMatrix s = psd_sqrt(rho);
    const CMatrix inner = s * sigma * s;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (inner + inner.adjoint()));
    return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

} // namespace

TEST_CASE("qfi vanishes without coupling") {
    CHECK(qfi(ProbeModel(2.0, 0.0, kPi), 1.0).value == doctest::Approx(0.0).scale(1e-20));
}

TEST_CASE("qfi against the bures-metric oracle") {
    const ProbeModel model(2.0, 0.3, kPi);
    const auto fam = model.family();
    const double nbar = 1.0;
    const double dn = 1e-2;
    const double f = root_fidelity(fam.matrix_at(nbar - dn / 2), fam.matrix_at(nbar + dn / 2));
    const double bures = 8.0 * (1.0 - f) / (dn * dn);
    CHECK(qfi(model, nbar).value == doctest::Approx(bures).epsilon(0.01));
}

TEST_CASE("analytic and finite-difference qfi agree") {
    const ProbeModel model(1.5, 0.5, 2.0);
    const auto fam = model.family();
    const StateMap map = [&](double n) { return fam.at(n); };
    for (double nbar : {0.0, 0.3, 1.2}) {
        const auto a = qfi(model, nbar);
        const auto b = qfi(map, nbar);
        CHECK(a.numerics.derivative == DerivativeScheme::analytic);
        CHECK(b.numerics.derivative == DerivativeScheme::central_difference);
        CHECK(b.value == doctest::Approx(a.value).epsilon(1e-6));
    }
}

TEST_CASE("qfi is unchanged by a kerr rotation") {
    for (double chi : {0.3, 2 * kPi * 0.38 * 0.38, 5.0}) {
        const ProbeModel plain(3.0, 0.38, kPi);
        const ProbeModel kerr(3.0, 0.38, kPi, chi);
        for (double nbar : {0.1, 0.25, 1.0}) {
            CHECK(std::abs(qfi(plain, nbar).value - qfi(kerr, nbar).value) < 1e-8);
        }
    }
}

TEST_CASE("symmetric logarithmic derivative") {
    const auto fam = ProbeModel(1.5, 0.4, kPi).family();
    const CMatrix rho = fam.matrix_at(0.5);
    const CMatrix drho = fam.derivative(0.5);
    const CMatrix l = symmetric_log_derivative(rho, drho);
    CHECK(max_abs_diff(0.5 * (l * rho + rho * l), drho) < 1e-8);
    CHECK(max_abs_diff(l, l.adjoint()) < 1e-10);
    CHECK((rho * l * l).trace().real() == doctest::Approx(qfi(fam, 0.5).value).epsilon(1e-6));
}

TEST_CASE("qfi depends on g tau only in the short-time regime") {
    const double nbar = 0.5;
    const double a = qfi(ProbeModel(2.0, 10.0, 0.02), nbar).value;
    const double b = qfi(ProbeModel(2.0, 20.0, 0.01), nbar).value;
    const double c = qfi(ProbeModel(2.0, 40.0, 0.005), nbar).value;
    CHECK(b == doctest::Approx(a).epsilon(0.01));
    CHECK(c == doctest::Approx(a).epsilon(0.01));
}

TEST_CASE("g_max anchors") {
    CHECK(find_gmax(2.0, 1.0, kPi).g_max == doctest::Approx(0.3).epsilon(0.05 / 0.3));
    CHECK(find_gmax(3.0, 0.25, kPi).g_max == doctest::Approx(0.38).epsilon(0.05 / 0.38));
    const auto r = find_gmax(2.0, 1.0, kPi / 10);
    CHECK(r.g_max == doctest::Approx(1.87).epsilon(0.1 / 1.87));
    CHECK_FALSE(r.on_boundary);
}

TEST_CASE("optimized qfi decreases with temperature") {
    double prev = 1e300;
    for (double nbar : {0.0, 0.25, 0.5, 1.0, 1.5}) {
        const double f = find_gmax(2.0, nbar, kPi).fq_max;
        CHECK(f < prev);
        CHECK(f <= 2.0 / ((1 + 2 * nbar) * (1 + 2 * nbar)) + 1e-6);
        prev = f;
    }
}

TEST_CASE("homodyne density") {
    CVector vac = CVector::Zero(6);
    vac[0] = 1.0;
    const auto rho0 = ProbeState::pure(vac);
    for (double x : {-1.5, 0.0, 0.7}) {
        CHECK(homodyne_pdf(rho0, {0.0}, x) == doctest::Approx(std::exp(-x * x) / std::sqrt(kPi)).epsilon(1e-14));
    }

    SUBCASE("phase shift by pi mirrors a real state") {
        const auto rho = ProbeModel(2.0, 0.3, kPi, 2 * kPi * 0.09).family().at(0.5);
        CHECK(rho.matrix().imag().cwiseAbs().maxCoeff() < 1e-12);
        for (double x : {-2.0, 0.3, 1.1, 3.4}) {
            CHECK(homodyne_pdf(rho, {0.4 + kPi}, x) == doctest::Approx(homodyne_pdf(rho, {0.4}, -x)).epsilon(1e-12));
        }
    }

    SUBCASE("moments of a coherent state") {
        const auto rho = ProbeModel(1.7, 0.0, 1.0).family().at(0.0);
        const RVector x = RVector::LinSpaced(6001, -14.0, 16.0);
        const double h = x[1] - x[0];
        const RVector p = homodyne_density(rho.matrix(), {0.0}, x);
        CHECK(h * p.sum() == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(h * x.dot(p) == doctest::Approx(std::sqrt(2.0) * 1.7).epsilon(1e-8));
    }
}

TEST_CASE("homodyne fisher information") {
    CHECK(cfi_homodyne(ProbeModel(2.0, 0.0, kPi), 0.5, {0.0}).value == doctest::Approx(0.0).scale(1e-20));

    SUBCASE("quantum cramer-rao ordering") {
        for (double g : {0.1, 0.3, 0.6}) {
            for (double chi : {0.0, 2 * kPi * g * g}) {
                const ProbeModel model(2.5, g, kPi, chi);
                for (double nbar : {0.1, 0.5, 1.0}) {
                    const double fq = qfi(model, nbar).value;
                    for (double phi : {0.0, 0.4, 1.3, 2.5}) {
                        CHECK(cfi_homodyne(model, nbar, {phi}).value <= fq + 1e-6);
                    }
                }
            }
        }
    }

    SUBCASE("period pi in the local-oscillator phase") {
        const ProbeModel model(2.0, 0.3, kPi, 0.2);
        for (double phi : {0.1, 0.9, 2.0}) {
            const double a = cfi_homodyne(model, 0.5, {phi}).value;
            const double b = cfi_homodyne(model, 0.5, {phi + kPi}).value;
            CHECK(b == doctest::Approx(a).epsilon(1e-10));
        }
    }

    SUBCASE("state-map path agrees with the analytic derivative") {
        const ProbeModel model(2.0, 0.3, kPi, 0.5);
        const auto fam = model.family();
        const StateMap map = [&](double n) { return fam.at(n); };
        const auto a = cfi_homodyne(model, 0.5, {0.7});
        const auto b = cfi_homodyne(map, 0.5, {0.7});
        CHECK(b.value == doctest::Approx(a.value).epsilon(1e-6));
        CHECK(a.numerics.quadrature_error < 1e-4);
        CHECK(a.numerics.quadrature_points == 4001);  // value comes from the refined grid
    }

    SUBCASE("direct trapezoid over the density") {
        // independent of the band expansion used internally
        const ProbeModel model(3.0, 0.38, kPi, 0.4);
        const auto fam = model.family();
        const double nbar = 0.3;
        const ProbeState rho = fam.at(nbar);
        double mean_n = 0.0;
        for (int k = 0; k < rho.dim(); ++k) mean_n += k * rho(k, k).real();
        const RVector x = quadrature_grid(QuadratureSpec{}, mean_n, 4001);
        const double h = x[1] - x[0];
        for (double phi : {0.0, 0.9, 2.5}) {
            const RVector p = homodyne_density(rho.matrix(), {phi}, x);
            const RVector dp = homodyne_density(fam.derivative(nbar), {phi}, x);
            double f = 0.0;
            for (int i = 0; i < x.size(); ++i) {
                if (p[i] > 1e-14) f += (i == 0 || i == x.size() - 1 ? 0.5 : 1.0) * h * dp[i] * dp[i] / p[i];
            }
            CHECK(cfi_homodyne(model, nbar, {phi}).value == doctest::Approx(f).epsilon(1e-10));
        }
    }

    SUBCASE("a grid that misses the state is reported") {
        QuadratureSpec narrow;
        narrow.half_width = 1.0;
        narrow.points = 41;
        CHECK_THROWS_AS(cfi_homodyne(ProbeModel(3.0, 0.38, kPi), 0.25, {0.0}, narrow), PrecisionError);
    }
}

TEST_CASE("optimal local-oscillator phase") {
    CHECK(distance_mod_pi(0.01) == doctest::Approx(0.01));
    CHECK(distance_mod_pi(kPi - 0.01) == doctest::Approx(0.01));
    CHECK(distance_mod_pi(-0.02) == doctest::Approx(0.02));

    const double g = find_gmax(3.0, 0.25, kPi).g_max;
    SUBCASE("cancelling kerr fixes the phase at zero") {
        const ProbeModel model(3.0, g, kPi, 2 * kPi * g * g);
        for (double nbar : {0.1, 0.5, 1.0}) {
            const auto opt = optimal_phi_lo(model, nbar);
            CHECK(distance_mod_pi(opt.phi_star) < 0.02);
            CHECK(opt.ratio <= 1.0 + 1e-6);
        }
    }
    SUBCASE("reported F_C is the homodyne CFI at the reported phase") {
        const ProbeModel model(3.0, g, kPi, 0.3);
        const auto opt = optimal_phi_lo(model, 0.4);
        CHECK(opt.fc == doctest::Approx(cfi_homodyne(model, 0.4, {opt.phi_star}).value).epsilon(1e-12));
        CHECK(opt.fq == doctest::Approx(qfi(model, 0.4).value).epsilon(1e-12));
        for (int k = 0; k < 16; ++k) CHECK(cfi_homodyne(model, 0.4, {k * kPi / 16}).value <= opt.fc * (1 + 1e-9));
    }
    SUBCASE("quarter-strength kerr moves the optimum with temperature") {
        const ProbeModel model(3.0, g, kPi, 2 * kPi * g * g / 4);
        const double p1 = optimal_phi_lo(model, 0.1).phi_star;
        const double p2 = optimal_phi_lo(model, 0.5).phi_star;
        const double p3 = optimal_phi_lo(model, 1.0).phi_star;
        const double spread = std::max({p1, p2, p3}) - std::min({p1, p2, p3});
        CHECK(spread > 0.02);
    }
}

TEST_CASE("homodyne sampling") {
    CHECK(sample_homodyne(ProbeModel(2.0, 0.3, kPi).family().at(0.5), {0.0}, 0, 1).empty());

    const int m = 100000;
    SUBCASE("vacuum variance") {
        const auto rho = ProbeModel(0.0, 0.0, 1.0, 0.0, FockCutoff(4)).family().at(0.0);
        const auto xs = sample_homodyne(rho, {0.0}, m, 11);
        const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        var /= (m - 1);
        // std error of a Gaussian sample variance: sigma^2 sqrt(2/(m-1))
        CHECK(std::abs(var - 0.5) < 3 * 0.5 * std::sqrt(2.0 / (m - 1)));
    }
    SUBCASE("coherent mean") {
        const auto rho = ProbeModel(2.0, 0.0, 1.0).family().at(0.0);
        const auto xs = sample_homodyne(rho, {0.0}, m, 12);
        const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
        CHECK(std::abs(mean - 2 * std::sqrt(2.0)) < 3 * std::sqrt(0.5 / m));
    }
    SUBCASE("seeded runs repeat") {
        const auto rho = ProbeModel(2.0, 0.3, kPi).family().at(0.5);
        CHECK(sample_homodyne(rho, {0.3}, 50, 99) == sample_homodyne(rho, {0.3}, 50, 99));
        CHECK(sample_homodyne(rho, {0.3}, 50, 99) != sample_homodyne(rho, {0.3}, 50, 100));
    }
}

TEST_CASE("bayesian estimation") {
    const ProbeModel model(3.0, 0.38, kPi, 2 * kPi * 0.38 * 0.38);
    const auto fam = model.family();

    SUBCASE("no data returns the prior") {
        const auto run = bayesian_estimate({}, fam, {0.0}, PriorRange{0.0, 1.5}, 301);
        CHECK(run.estimate == doctest::Approx(0.75).epsilon(1e-12));
        CHECK((run.posterior.array() - 1.0 / 301).abs().maxCoeff() < 1e-15);
        CHECK_FALSE(run.boundary_warning);
    }
    SUBCASE("consistent with the cramer-rao scale") {
        const double truth = 0.5;
        const int m = 10000;
        const double fc = cfi_homodyne(model, truth, {0.0}).value;
        const auto xs = sample_homodyne(fam.at(truth), {0.0}, m, 2024);
        const auto run = bayesian_estimate(xs, fam, {0.0}, PriorRange{0.0, 1.5}, 601);
        CHECK(std::abs(run.estimate - truth) <= 4.0 / std::sqrt(m * fc));
        CHECK_FALSE(run.boundary_warning);
        CHECK(run.posterior.sum() == doctest::Approx(1.0));
    }
    SUBCASE("fast and generic likelihoods agree") {
        const auto xs = sample_homodyne(fam.at(0.4), {0.3}, 200, 5);
        const StateMap map = [&](double n) { return fam.at(n); };
        const auto a = bayesian_estimate(xs, fam, {0.3}, PriorRange{0.0, 1.5}, 61);
        const auto b = bayesian_estimate(xs, map, {0.3}, PriorRange{0.0, 1.5}, 61);
        CHECK((a.posterior - b.posterior).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("mass at the prior edge is flagged") {
        const auto xs = sample_homodyne(fam.at(1.4), {0.0}, 4000, 8);
        CHECK(bayesian_estimate(xs, fam, {0.0}, PriorRange{0.0, 0.3}, 101).boundary_warning);
    }
    CHECK_THROWS_AS(bayesian_estimate({}, fam, {0.0}, PriorRange{1.0, 0.5}, 11), DomainError);
}
