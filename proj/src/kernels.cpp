#include "relaydiff/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace relaydiff::kernels {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

// Maclaurin series of E(y), reliable for |y| < 2.
double erf_series(double y) {
    double term = y;
    double sum = y;
    double y2 = y * y;
    for (int n = 1; n < 200; ++n) {
        term *= -y2 / n;
        double add = term / (2 * n + 1);
        sum += add;
        if (std::abs(add) < 1e-17 * std::abs(sum))
            break;
    }
    return 2.0 / kSqrtPi * sum;
}

// Continued fraction sqrt(pi) e^{y^2} erfc(y) = 1/(y+ (1/2)/(y+ 1/(y+ (3/2)/(y+...))))
// evaluated with the modified Lentz algorithm; y >= 2.
double erfc_cf(double y) {
    const double tiny = 1e-300;
    double f = tiny;
    double c = f;
    double d = 0.0;
    for (int j = 1; j < 300; ++j) {
        double a = (j == 1) ? 1.0 : (j - 1) / 2.0;
        d = y + a * d;
        if (std::abs(d) < tiny) d = tiny;
        c = y + a / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16)
            break;
    }
    return std::exp(-y * y) / kSqrtPi * f;
}

}  // namespace

double erf_E(double y) {
    if (y < 0)
        return -erf_E(-y);
    if (y < 2.0)
        return erf_series(y);
    return 1.0 - erfc_cf(y);
}

double psi(double x, double tau, const ThresholdDomain& domain) {
    if (!(tau > 0))
        throw DomainError("psi: tau must be positive");
    double z = domain.hi - x;
    return std::exp(-z * z / (4 * tau)) / std::sqrt(M_PI * tau);
}

double Psi_tail(double x, double tau, const ThresholdDomain& domain) {
    if (!(tau > 0))
        throw DomainError("Psi_tail: tau must be positive");
    return erf_E((domain.hi - x) / (2 * std::sqrt(tau)));
}

namespace {

// Cosine-series evaluation, efficient for tau >~ L^2/pi.
double phi_series(double z, double tau, double L, const TruncationPolicy& pol) {
    double sum = 1.0 / L;
    double decay = (M_PI / L) * (M_PI / L) * tau;
    for (int n = 1;; ++n) {
        double mag = 2.0 / L * std::exp(-decay * n * n);
        double ratio = std::exp(-decay * (2 * n + 1));
        if (mag / (1.0 - ratio) < pol.abs_tol)
            break;
        if (n > pol.max_terms)
            throw IntegrationError("phi: series truncation failed (tau too small)");
        sum += mag * std::cos(n * M_PI * z / L);
    }
    return sum;
}

// Image (reflection) sum, efficient for small tau.
double phi_images(double z, double tau, double L, const TruncationPolicy& pol) {
    double norm = 1.0 / std::sqrt(M_PI * tau);
    double sum = norm * std::exp(-z * z / (4 * tau));
    for (int m = 1;; ++m) {
        double zp = z + 2 * m * L;
        double zm = z - 2 * m * L;
        double add = norm * (std::exp(-zp * zp / (4 * tau)) + std::exp(-zm * zm / (4 * tau)));
        sum += add;
        if (add < pol.abs_tol)
            break;
        if (m > pol.max_terms)
            throw IntegrationError("phi: image sum failed to converge");
    }
    return sum;
}

double Phi_series(double z, double tau, double L, const TruncationPolicy& pol) {
    double sum = z / L;
    double decay = (M_PI / L) * (M_PI / L) * tau;
    for (int n = 1;; ++n) {
        double mag = 2.0 / (M_PI * n) * std::exp(-decay * n * n);
        double ratio = std::exp(-decay * (2 * n + 1));
        if (mag / (1.0 - ratio) < pol.abs_tol)
            break;
        if (n > pol.max_terms)
            throw IntegrationError("Phi_tail: series truncation failed");
        sum += mag * std::sin(n * M_PI * z / L);
    }
    return sum;
}

double Phi_images(double z, double tau, double L, const TruncationPolicy& pol) {
    double s = 2 * std::sqrt(tau);
    double sum = erf_E(z / s);
    for (int m = 1;; ++m) {
        double add = erf_E((z + 2 * m * L) / s) - erf_E(2 * m * L / s)
                   + erf_E((z - 2 * m * L) / s) - erf_E(-2 * m * L / s);
        sum += add;
        if (std::abs(add) < pol.abs_tol && 2 * m * L - z > 6 * s)
            break;
        if (m > pol.max_terms)
            throw IntegrationError("Phi_tail: image sum failed to converge");
    }
    return sum;
}

}  // namespace

double phi(double x, double tau, const ThresholdDomain& domain, const TruncationPolicy& pol) {
    if (!(tau > 0))
        throw DomainError("phi: tau must be positive");
    double L = domain.length();
    double z = domain.hi - x;
    if (tau >= L * L / M_PI)
        return phi_series(z, tau, L, pol);
    return phi_images(z, tau, L, pol);
}

double Phi_tail(double x, double tau, const ThresholdDomain& domain, const TruncationPolicy& pol) {
    if (!(tau > 0))
        throw DomainError("Phi_tail: tau must be positive");
    double L = domain.length();
    double z = domain.hi - x;
    if (tau >= L * L / M_PI)
        return Phi_series(z, tau, L, pol);
    return Phi_images(z, tau, L, pol);
}

FourierProfile FourierProfile::from_samples(std::span<const double> u0,
                                            const ThresholdDomain& domain, int max_terms) {
    size_t m = u0.size() - 1;
    if (u0.size() < 3 || m % 2 != 0)
        throw StructuralError("FourierProfile: need an odd number of samples (even intervals)");
    double L = domain.length();
    double h = L / m;

    auto simpson = [&](auto&& f) {
        double s = f(0) + f(m);
        for (size_t i = 1; i < m; ++i)
            s += (i % 2 == 1 ? 4.0 : 2.0) * f(i);
        return s * h / 3.0;
    };

    FourierProfile prof{0.0, {}, domain};
    prof.mass = simpson([&](size_t i) { return u0[i]; });

    // Cap modes at what the grid resolves.
    int n_modes = std::min<int>(max_terms, static_cast<int>(m / 2));
    prof.coeffs.resize(n_modes);
    for (int n = 1; n <= n_modes; ++n) {
        prof.coeffs[n - 1] = simpson([&](size_t i) {
            double z = L - i * h;  // hi - x at sample i
            return u0[i] * std::cos(n * M_PI * z / L);
        });
    }
    return prof;
}

double omega(double x, double t, const FourierProfile& prof, double D, double t0,
             const TruncationPolicy& pol) {
    if (!(t > t0))
        throw DomainError("omega: t must exceed t0");
    if (!(D > 0))
        throw DomainError("omega: D must be positive");
    double L = prof.domain.length();
    double z = prof.domain.hi - x;
    double decay = (M_PI / L) * (M_PI / L) * D * (t - t0);
    double sum = prof.mass / L;
    for (size_t n = 1; n <= prof.coeffs.size(); ++n) {
        double mag = 2.0 / L * prof.coeffs[n - 1] * std::exp(-decay * n * n);
        if (std::abs(mag) < pol.abs_tol && decay * n > 1.0)
            break;
        sum += mag * std::cos(n * M_PI * z / L);
    }
    return sum;
}

KernelBoundsReport verify_kernel_bounds(const ThresholdDomain& domain,
                                        std::span<const double> tau_grid, int x_samples) {
    KernelBoundsReport report{0.0, 0.0, {}, true};
    double L = domain.length();
    TruncationPolicy pol{1e-14, 100000};
    for (double tau : tau_grid) {
        double sup = 0.0;
        for (int i = 0; i <= x_samples; ++i) {
            double x = domain.lo + L * i / x_samples;
            sup = std::max(sup, std::abs(phi(x, tau, domain, pol) - psi(x, tau, domain)));
        }
        double scaled = sup * std::exp(L * L / (5 * tau));
        report.scaled_sup.push_back(scaled);
        if (!std::isfinite(scaled))
            report.bounded = false;
        if (scaled > report.fitted_c) {
            report.fitted_c = scaled;
            report.worst_tau = tau;
        }
    }
    return report;
}

}  // namespace relaydiff::kernels
