#pragma once

#include <span>
#include <vector>

#include "relaydiff/common.hpp"

namespace relaydiff::kernels {

/// Series truncation control for the interval kernels.
struct TruncationPolicy {
    double abs_tol = 1e-12;
    int max_terms = 4000;
};

/// Half-line heat kernel with a reflecting end at domain.hi:
/// psi(x,tau) = (pi tau)^{-1/2} exp(-(hi-x)^2/(4 tau)).
double psi(double x, double tau, const ThresholdDomain& domain);

/// E(y) = (2/sqrt(pi)) \int_0^y exp(-z^2) dz, odd extension for y < 0.
/// Absolute error <= 1e-14.
double erf_E(double y);

/// Tail mass of psi over [x, hi]: E((hi-x)/(2 sqrt(tau))).
double Psi_tail(double x, double tau, const ThresholdDomain& domain);

/// Fundamental solution of the Neumann problem on [lo, hi] with a delta at
/// hi. Cosine series for large tau, image sum for small tau; the neglected
/// tail is below pol.abs_tol either way.
double phi(double x, double tau, const ThresholdDomain& domain,
           const TruncationPolicy& pol = {});

/// Tail mass of phi over [x, hi].
double Phi_tail(double x, double tau, const ThresholdDomain& domain,
                const TruncationPolicy& pol = {});

/// Cosine-expansion of initial data on [lo, hi] for the diffusion problem
/// with diffusivity D released at time t0.
struct FourierProfile {
    double mass;                 // \int omega_0 dx
    std::vector<double> coeffs;  // A_n, n >= 1
    ThresholdDomain domain;

    /// Build from initial data sampled on a uniform grid x[0]=lo .. x[m]=hi
    /// (composite Simpson; m must be even). Modes beyond the grid Nyquist
    /// limit are dropped.
    static FourierProfile from_samples(std::span<const double> u0,
                                       const ThresholdDomain& domain,
                                       int max_terms = 4000);
};

/// Fourier solution of the Neumann diffusion problem at (x, t).
double omega(double x, double t, const FourierProfile& prof, double D, double t0,
             const TruncationPolicy& pol = {});

struct KernelBoundsReport {
    double fitted_c;          // smallest c with sup|phi-psi| <= c exp(-L^2/(5 tau))
    double worst_tau;         // tau attaining the fit
    std::vector<double> scaled_sup;  // sup_x|phi-psi| * exp(L^2/(5 tau)) per tau
    bool bounded;             // all entries finite
};

/// Evaluates sup_x |phi - psi| over an x grid for each tau in tau_grid and
/// fits the smallest constant of the closeness bound.
KernelBoundsReport verify_kernel_bounds(const ThresholdDomain& domain,
                                        std::span<const double> tau_grid,
                                        int x_samples = 400);

}  // namespace relaydiff::kernels
