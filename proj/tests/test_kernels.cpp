#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "relaydiff/kernels.hpp"

using namespace relaydiff;
using namespace relaydiff::kernels;

namespace {
const ThresholdDomain dom(0.05, 0.25);

// Adaptive-ish quadrature oracle for E(y): composite Simpson with enough
// panels that the result is far below the tolerance under test.
double erf_quadrature(double y) {
    const int n = 20000;  // even
    double h = y / n, s = std::exp(0.0) + std::exp(-y * y);
    for (int i = 1; i < n; ++i)
        s += (i % 2 ? 4.0 : 2.0) * std::exp(-(i * h) * (i * h));
    return 2.0 / std::sqrt(std::numbers::pi) * s * h / 3.0;
}
}  // namespace

TEST_CASE("psi closed-form values") {
    CHECK(psi(dom.hi, 1.0 / std::numbers::pi, dom) == doctest::Approx(1.0).epsilon(1e-14));
    double tau = 0.03;
    CHECK(psi(dom.hi - 2 * std::sqrt(tau), tau, dom) ==
          doctest::Approx(std::exp(-1.0) / std::sqrt(std::numbers::pi * tau)).epsilon(1e-14));
    CHECK_THROWS_AS(psi(0.1, 0.0, dom), DomainError);
}

TEST_CASE("psi integrates to one over the half line") {
    for (double tau : {0.001, 0.05, 1.0}) {
        double s = 0.0;
        const int n = 400000;
        double a = dom.hi - 40 * std::sqrt(tau);
        double h = (dom.hi - a) / n;
        for (int i = 0; i < n; ++i) s += psi(a + (i + 0.5) * h, tau, dom) * h;
        CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("erf_E against quadrature oracle") {
    CHECK(erf_E(0.0) == 0.0);
    CHECK(erf_E(1.0) == doctest::Approx(0.8427007929497149).epsilon(1e-14));
    CHECK(erf_E(10.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(erf_E(-1.0) == doctest::Approx(-erf_E(1.0)).epsilon(1e-15));
    for (double y : {0.1, 0.5, 1.3, 1.9, 2.0, 2.5, 3.7, 5.0})
        CHECK(erf_E(y) == doctest::Approx(erf_quadrature(y)).epsilon(1e-12));
    // Cross-check against the standard library too.
    for (double y = 0.05; y < 6.0; y += 0.173)
        CHECK(std::abs(erf_E(y) - std::erf(y)) < 1e-14);
}

TEST_CASE("Psi_tail values and limits") {
    CHECK(Psi_tail(dom.hi, 0.1, dom) == doctest::Approx(0.0));
    CHECK(Psi_tail(dom.hi - 2 * std::sqrt(0.01), 0.01, dom) ==
          doctest::Approx(erf_E(1.0)).epsilon(1e-14));
    CHECK(Psi_tail(0.1, 1e-6, dom) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(Psi_tail(0.1, -1.0, dom), DomainError);
}

TEST_CASE("phi mass and limits") {
    // Large tau: uniform 1/L.
    for (double x : {0.05, 0.1, 0.2, 0.25})
        CHECK(phi(x, 50.0, dom) == doctest::Approx(1.0 / dom.length()).epsilon(1e-12));
    // Unit mass for a range of tau (midpoint quadrature).
    for (double tau : {0.002, 0.01, 0.05, 0.5}) {
        double s = 0.0;
        const int n = 20000;
        double h = dom.length() / n;
        for (int i = 0; i < n; ++i) s += phi(dom.lo + (i + 0.5) * h, tau, dom) * h;
        CHECK(s == doctest::Approx(1.0).epsilon(1e-7));
    }
}

TEST_CASE("phi is non-increasing in hi - x") {
    for (double tau : {0.003, 0.02, 0.2}) {
        double prev = -1.0;
        for (int i = 0; i <= 200; ++i) {
            double x = dom.lo + dom.length() * i / 200.0;
            double val = phi(x, tau, dom);
            CHECK(val >= prev - 1e-12);
            prev = val;
        }
    }
}

TEST_CASE("Phi_tail endpoints and monotonicity") {
    for (double tau : {0.002, 0.05, 1.0}) {
        CHECK(Phi_tail(dom.lo, tau, dom) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(Phi_tail(dom.hi, tau, dom) == doctest::Approx(0.0).epsilon(1e-10));
        double prev = 2.0;
        for (int i = 0; i <= 100; ++i) {
            double x = dom.lo + dom.length() * i / 100.0;
            double val = Phi_tail(x, tau, dom);
            CHECK(val <= prev + 1e-10);
            CHECK(val >= -1e-10);
            CHECK(val <= 1.0 + 1e-10);
            prev = val;
        }
    }
}

TEST_CASE("Phi_tail matches quadrature of phi") {
    for (double tau : {0.004, 0.03, 0.3}) {
        for (double x : {0.08, 0.15, 0.22}) {
            double s = 0.0;
            const int n = 20000;
            double h = (dom.hi - x) / n;
            for (int i = 0; i < n; ++i) s += phi(x + (i + 0.5) * h, tau, dom) * h;
            CHECK(Phi_tail(x, tau, dom) == doctest::Approx(s).epsilon(1e-7));
        }
    }
}

TEST_CASE("small-tau closeness of phi and psi (bound shape)") {
    const double L = dom.length();
    std::vector<double> taus;
    for (double t = 0.005; t <= 0.5; t *= 1.5) taus.push_back(t);
    auto rep = verify_kernel_bounds(dom, taus);
    CHECK(rep.bounded);
    for (double s : rep.scaled_sup) CHECK(s <= rep.fitted_c * (1 + 1e-12));
    // Halving theta cannot increase the fitted constant.
    std::vector<double> small_taus;
    for (double t : taus)
        if (t <= 0.25) small_taus.push_back(t);
    auto rep2 = verify_kernel_bounds(dom, small_taus);
    CHECK(rep2.fitted_c <= rep.fitted_c * (1 + 1e-12));
    // Error at tau = L^2/20 is at most c e^{-4}.
    double tau0 = L * L / 20.0;
    double sup = 0.0;
    for (int i = 0; i <= 400; ++i) {
        double x = dom.lo + L * i / 400.0;
        sup = std::max(sup, std::abs(phi(x, tau0, dom) - psi(x, tau0, dom)));
    }
    CHECK(sup <= rep.fitted_c * std::exp(-4.0) * (1 + 1e-9));
}

TEST_CASE("Phi_tail close to Psi_tail for small tau") {
    for (double tau : {0.001, 0.002, 0.004}) {
        double sup = 0.0;
        for (int i = 0; i <= 400; ++i) {
            double x = dom.lo + dom.length() * i / 400.0;
            sup = std::max(sup, std::abs(Phi_tail(x, tau, dom) - Psi_tail(x, tau, dom)));
        }
        CHECK(sup <= 5.0 * std::exp(-dom.length() * dom.length() / (5 * tau)));
    }
}

TEST_CASE("FourierProfile and omega") {
    const int m = 2000;  // even sample count
    std::vector<double> uni(m + 1, 1.0 / dom.length());
    auto prof = FourierProfile::from_samples(uni, dom, 400);
    CHECK(prof.mass == doctest::Approx(1.0).epsilon(1e-10));
    for (double x : {0.07, 0.16, 0.24})
        CHECK(omega(x, 1.0, prof, 1e-3, 0.0) ==
              doctest::Approx(1.0 / dom.length()).epsilon(1e-9));

    // Narrow bump at hi: late-time limit is mass/L.
    std::vector<double> bump(m + 1, 0.0);
    double eps = 0.01, h = dom.length() / m;
    for (int i = 0; i <= m; ++i) {
        double x = dom.lo + i * h;
        if (x >= dom.hi - eps) bump[i] = 1.0 / eps;
    }
    auto pb = FourierProfile::from_samples(bump, dom, 400);
    CHECK(pb.mass == doctest::Approx(1.0).epsilon(1e-2));
    for (double x : {0.07, 0.16, 0.24})
        CHECK(omega(x, 1e4, pb, 1e-3, 0.0) ==
              doctest::Approx(pb.mass / dom.length()).epsilon(1e-8));
    CHECK_THROWS_AS(omega(0.1, 0.0, pb, 1e-3, 0.0), DomainError);

    // |A_n| <= mass for nonnegative data.
    for (double a : pb.coeffs) CHECK(std::abs(a) <= pb.mass * (2.0 / dom.length()) + 1e-9);
}
