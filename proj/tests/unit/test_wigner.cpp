#include <doctest.h>

#include <cmath>
#include <random>

#include "optotherm/errors.hpp"
#include "optotherm/metrology.hpp"
#include "optotherm/wigner.hpp"

using namespace optotherm;

namespace {

ProbeState fock(int n, int dim) {
    CVector v = CVector::Zero(dim);
    v[n] = 1.0;
    return ProbeState::pure(v);
}

} // namespace

TEST_CASE("vacuum and fock states") {
    CHECK(wigner_point(fock(0, 4), 0.0, 0.0) == doctest::Approx(1.0 / kPi).epsilon(1e-14));
    CHECK(wigner_point(fock(1, 4), 0.0, 0.0) == doctest::Approx(-1.0 / kPi).epsilon(1e-14));
    CHECK(std::abs(wigner_point(fock(0, 4), 12.0, -9.0)) < 1e-12);
    // |1>: W = (2 r^2 - 1) e^{-r^2} / pi
    const double r2 = 0.8 * 0.8 + 0.3 * 0.3;
    CHECK(wigner_point(fock(1, 4), 0.8, 0.3) == doctest::Approx((2 * r2 - 1) * std::exp(-r2) / kPi).epsilon(1e-13));
}

TEST_CASE("coherent state is a displaced vacuum") {
    const double a = 2.0;
    const auto rho = ProbeModel(a, 0.0, 1.0).family().at(0.0);
    CHECK(wigner_point(rho, std::sqrt(2.0) * a, 0.0) == doctest::Approx(1.0 / kPi).epsilon(1e-10));
    const double q = std::sqrt(2.0) * a + 0.4;
    const double p = -0.7;
    const double d2 = 0.4 * 0.4 + 0.7 * 0.7;
    CHECK(wigner_point(rho, q, p) == doctest::Approx(std::exp(-d2) / kPi).epsilon(1e-10));
}

TEST_CASE("laguerre kernels agree with the line-integral oracle") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    CMatrix a(6, 3);
    for (int i = 0; i < a.size(); ++i) a.data()[i] = Complex(normal(rng), normal(rng));
    CMatrix m = a * a.adjoint();
    m /= m.trace().real();
    const ProbeState rho(m);

    WignerGridSpec spec;
    spec.q_points = spec.p_points = 101;
    spec.q_min = spec.p_min = -7.0;
    spec.q_max = spec.p_max = 7.0;
    const auto grid = wigner_grid(rho, spec);
    std::uniform_int_distribution<int> pick(0, 100);
    for (int k = 0; k < 20; ++k) {
        const int i = pick(rng);
        const int j = pick(rng);
        CHECK(std::abs(grid.values(i, j) - wigner_point(rho, grid.q[i], grid.p[j])) < 1e-12);
        CHECK(std::abs(grid.values(i, j) - wigner_line_integral_oracle(rho, grid.q[i], grid.p[j])) < 1e-7);
    }
}

TEST_CASE("grid invariants") {
    const auto rho = ProbeModel(2.0, 0.3, kPi).family().at(1.0);
    const auto grid = wigner_grid(rho, WignerGridSpec::for_coherent(2.0));
    CHECK(grid.imag_residue < 1e-10);
    CHECK(std::abs(grid.normalization - 1.0) < 1e-6);
    CHECK(wigner_min(grid) >= -1.0 / kPi - 1e-9);
    CHECK(grid.values.maxCoeff() <= 1.0 / kPi + 1e-9);

    SUBCASE("gaussian state is non-negative") {
        const auto coh = ProbeModel(1.5, 0.0, 1.0).family().at(0.0);
        CHECK(wigner_min(wigner_grid(coh, WignerGridSpec::for_coherent(1.5))) >= -1e-9);
    }
    SUBCASE("grid that misses the state is reported") {
        WignerGridSpec small;
        small.q_min = small.p_min = -1.0;
        small.q_max = small.p_max = 1.0;
        small.q_points = small.p_points = 21;
        CHECK_THROWS_AS(wigner_grid(rho, small), PrecisionError);
    }
}

TEST_CASE("kerr restores positivity") {
    const double g = find_gmax(3.0, 0.25, kPi).g_max;
    const auto spec = WignerGridSpec::for_coherent(3.0);
    const auto before = ProbeModel(3.0, g, kPi).family().at(0.25);
    CHECK(wigner_min(wigner_grid(before, spec)) < -0.01);
    for (double nbar : {0.1, 0.25, 0.5, 1.0}) {
        const auto after = ProbeModel(3.0, g, kPi, 2 * kPi * g * g).family().at(nbar);
        CHECK(wigner_min(wigner_grid(after, spec)) >= -1e-6);
    }
}
