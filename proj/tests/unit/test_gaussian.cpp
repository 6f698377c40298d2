#include <doctest.h>

#include <cmath>

#include "optotherm/errors.hpp"
#include "optotherm/gaussian.hpp"

using namespace optotherm;

TEST_CASE("linearized hamiltonian matrix") {
    const Matrix4 free = linearized_hamiltonian_matrix(0.0, 2.0);
    CHECK(free.topLeftCorner(2, 2).isZero());
    CHECK(free.bottomRightCorner(2, 2).isIdentity());
    CHECK(free.topRightCorner(2, 2).isZero());

    const Matrix4 h = linearized_hamiltonian_matrix(0.3, 2.0);
    CHECK(h == h.transpose());
    CHECK(h(0, 2) == doctest::Approx(-1.2));
    CHECK(h(2, 0) == doctest::Approx(-1.2));
}

TEST_CASE("symplectic propagator") {
    CHECK((symplectic_propagator(0.4, 2.0, 0.0) - Matrix4::Identity()).cwiseAbs().maxCoeff() < 1e-15);

    const double tau = 0.8;
    const Matrix4 s = symplectic_propagator(0.0, 2.0, tau);
    CHECK((s.topLeftCorner(2, 2) - Matrix2::Identity()).cwiseAbs().maxCoeff() < 1e-14);
    // free mechanics: phase-space rotation by tau
    CHECK(std::abs(s(2, 2) - std::cos(tau)) < 1e-14);
    CHECK(std::abs(s(3, 3) - std::cos(tau)) < 1e-14);
    CHECK(std::abs(std::abs(s(2, 3)) - std::sin(tau)) < 1e-14);

    const Matrix4 omega = symplectic_form(2);
    for (double t : {0.3, kPi, 7.0}) {
        const Matrix4 st = symplectic_propagator(0.5, 3.0, t);
        CHECK((st * omega * st.transpose() - omega).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("sigma_L closed form") {
    CHECK(sigma_L_closed_form(0.3, 2.0, 1.0, 0.0).isIdentity(1e-15));

    const Matrix2 s = sigma_L_closed_form(0.1, 2.0, 1.0, kPi);
    CHECK(s(0, 1) == doctest::Approx(4 * kPi * 0.04).epsilon(1e-14));
    CHECK(s(0, 1) == doctest::Approx(0.502655));
    CHECK(s(1, 1) - 1.0 - s(0, 1) * s(0, 1) == doctest::Approx(1.92).epsilon(1e-12));

    SUBCASE("matches symplectic evolution on a 5x5x5 grid") {
        for (double g : {0.0, 0.05, 0.1, 0.3, 0.6}) {
            for (double a : {0.5, 1.0, 2.0, 4.0, 8.0}) {
                for (double tau : {0.1, 1.0, kPi / 2, kPi, 5.0}) {
                    const auto full = evolve_covariance(initial_covariance(0.7), g, a, tau);
                    CHECK(full.uncertainty_margin() > -1e-10);
                    const double dev =
                        (full.optical().cov() - RMatrix(sigma_L_closed_form(g, a, 0.7, tau))).cwiseAbs().maxCoeff();
                    const double scale = std::max(1.0, full.cov().cwiseAbs().maxCoeff());
                    CHECK(dev / scale < 1e-10);
                }
            }
        }
    }
}

TEST_CASE("gaussian qfi") {
    CHECK(gaussian_qfi(0.0, 2.0, 1.0, kPi).value == 0.0);

    for (double g : {0.01, 0.1, 0.3}) {
        for (double a : {1.0, 3.0}) {
            for (double nbar : {0.0, 0.5, 2.0}) {
                for (double tau : {0.5, kPi, 4.0}) {
                    const double num = gaussian_qfi(g, a, nbar, tau).value;
                    const double closed = gaussian_qfi_closed_form(g, a, nbar, tau);
                    CHECK(num == doctest::Approx(closed).epsilon(1e-10));
                }
            }
        }
    }

    SUBCASE("large-alpha limit") {
        for (double nbar : {0.25, 1.0}) {
            const double limit = 2.0 / ((1 + 2 * nbar) * (1 + 2 * nbar));
            CHECK(gaussian_qfi(0.3, 1000.0, nbar, kPi).value == doctest::Approx(limit).epsilon(1e-5));
        }
    }

    SUBCASE("builder overload uses the covariance callback") {
        const CovarianceBuilder b = [](double n) {
            return std::pair{sigma_L_closed_form(0.2, 2.0, n, kPi), sigma_L_derivative(0.2, 2.0, kPi)};
        };
        CHECK(gaussian_qfi(b, 0.4).value == doctest::Approx(gaussian_qfi(0.2, 2.0, 0.4, kPi).value));
    }

    SUBCASE("derivative of sigma_L matches finite differences") {
        const double dn = 1e-5;
        const Matrix2 fd = (sigma_L_closed_form(0.2, 2.0, 0.5 + dn, 1.3) - sigma_L_closed_form(0.2, 2.0, 0.5 - dn, 1.3)) / (2 * dn);
        CHECK((fd - sigma_L_derivative(0.2, 2.0, 1.3)).cwiseAbs().maxCoeff() < 1e-7);
    }

    CHECK_THROWS_AS(gaussian_qfi(Matrix2::Zero(), Matrix2::Zero()), DomainError);
}

TEST_CASE("general-dyne fisher information") {
    const Matrix2 s = sigma_L_closed_form(0.1, 2.0, 1.0, kPi);
    CHECK(generaldyne_cfi(s, Matrix2::Zero(), GeneralDyneSetting(0.3, 0.2)).value == 0.0);
    CHECK_THROWS_AS(GeneralDyneSetting(0.0, 0.0), DomainError);

    SUBCASE("homodyne limit reproduces the closed form") {
        for (double g : {0.05, 0.1, 0.3}) {
            for (double a : {1.0, 2.0, 4.0}) {
                for (double nbar : {0.0, 1.0}) {
                    const Matrix2 sl = sigma_L_closed_form(g, a, nbar, kPi);
                    const Matrix2 ds = sigma_L_derivative(g, a, kPi);
                    for (double th : {0.2, 0.9, kPi / 2, 2.5}) {
                        const auto lim = homodyne_cfi_limit(sl, ds, th);
                        CHECK(lim.value == doctest::Approx(homodyne_cfi_closed_form(g, a, nbar, th)).epsilon(1e-4));
                    }
                }
            }
        }
    }

    SUBCASE("closed-form special angles") {
        CHECK(homodyne_cfi_closed_form(0.1, 2.0, 1.0, 0.0) == 0.0);
        const double ga = 0.2;
        const double expected = 2 * std::pow(4 * ga, 4) /
                                std::pow(1 + 16 * ga * ga * 3 + 16 * kPi * kPi * std::pow(ga, 4), 2);
        CHECK(homodyne_cfi_closed_form(0.1, 2.0, 1.0, kPi / 2) == doctest::Approx(expected).epsilon(1e-14));
    }

    SUBCASE("ordering under the gaussian qfi") {
        for (double g : {0.05, 0.2, 0.5}) {
            for (double a : {1.0, 3.0, 6.0}) {
                for (double tau : {0.5, kPi}) {
                    const Matrix2 sl = sigma_L_closed_form(g, a, 0.5, tau);
                    const Matrix2 ds = sigma_L_derivative(g, a, tau);
                    const double fq = gaussian_qfi(sl, ds).value;
                    for (double z : {1e-3, 0.1, 1.0, 10.0}) {
                        for (double th : {0.0, 0.7, 2.0}) {
                            CHECK(generaldyne_cfi(sl, ds, GeneralDyneSetting(z, th)).value <= fq + 1e-8);
                        }
                    }
                }
            }
        }
    }

    SUBCASE("information vanishes for large alpha") {
        for (double z : {1e-6, 0.1, 1.0}) {
            for (double th : {0.3, kPi / 2}) {
                double prev = 1e300;
                for (double a : {2.0, 4.0, 8.0, 16.0}) {
                    const double f = generaldyne_cfi(sigma_L_closed_form(0.3, a, 1.0, kPi), sigma_L_derivative(0.3, a, kPi),
                                                     GeneralDyneSetting(z, th)).value;
                    CHECK(f < prev);
                    prev = f;
                }
                CHECK(prev < 1e-3);
            }
        }
    }
}

TEST_CASE("covariance validation") {
    RMatrix bad = RMatrix::Identity(2, 2) * 0.5;
    CHECK_THROWS_AS(CovarianceState(RVector::Zero(2), bad), DomainError);
    RMatrix asym = RMatrix::Identity(2, 2);
    asym(0, 1) = 0.1;
    CHECK_THROWS_AS(CovarianceState(RVector::Zero(2), asym), DomainError);
    CHECK(initial_covariance(0.0).uncertainty_margin() == doctest::Approx(0.0).scale(1e-14));
    CHECK_THROWS_AS(initial_covariance(-1.0), DomainError);
}

TEST_CASE("linearized qfi tracks the full model at weak coupling") {
    for (double a : {3.0, 4.0}) {
        for (double g : {0.02, 0.05}) {
            const double full = qfi(ProbeModel(a, g, kPi), 0.5).value;
            CHECK(gaussian_qfi(g, a, 0.5, kPi).value == doctest::Approx(full).epsilon(0.15));
        }
    }
}
