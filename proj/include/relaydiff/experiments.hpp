#pragma once

#include <string>
#include <vector>

#include "relaydiff/fronts.hpp"
#include "relaydiff/kernels.hpp"
#include "relaydiff/solver.hpp"

namespace relaydiff::experiments {

/// Observation schedule for the slow (tau/D) counting argument:
/// decreasing tau_i with guard widths chi_i, increasing cuts x_1..x_{N+1}.
struct SequencePlan1 {
    int N;
    std::vector<double> tau;   // size N, decreasing
    std::vector<double> chi;   // size N
    std::vector<double> x;     // size N+1, increasing
    ThresholdDomain domain;
};

/// Observation schedule on the O(1) time scale: interleaved theta_i < t_i
/// and scaled depths y_i (front cuts sit at hi - sqrt(D) y_i).
struct SequencePlan2 {
    int N;
    std::vector<double> t;      // size N, increasing
    std::vector<double> theta;  // size N
    std::vector<double> y;      // size N+1, y[0] = 0
    double mu;
};

/// Deterministic realization of the inductive schedule construction.
/// Throws IntegrationError naming the blocking index when infeasible.
SequencePlan1 build_sequences_thm1(const ThresholdDomain& domain, int N,
                                   const kernels::TruncationPolicy& pol = {});

/// Independent re-verification of the plan's defining inequalities; the tail
/// masses are recomputed by direct quadrature of the kernel, not by the
/// builder's series route.
bool verify_plan1(const SequencePlan1& plan, int scan_points = 1000);

SequencePlan2 build_sequences_thm2(int N, double mu, double margin = 0.05);

bool verify_plan2(const SequencePlan2& plan, int scan_points = 1000);

struct ObservationResult {
    int i;
    double t_from;        // first sampled time
    int expected;         // sign-change lower bound
    int measured_min;     // min count over sampled times
    bool count_pass;
    bool enabling_pass;   // recorded mass-ratio inequalities
};

struct VerificationReport {
    std::string scenario;
    std::vector<ObservationResult> observations;
    bool pass;
    std::string note;

    std::string to_json() const;
};

/// Probe positions a run must record for the verifier to check the enabling
/// inequalities.
std::vector<double> probes_for(const SequencePlan1& plan);
std::vector<double> probes_for(const SequencePlan2& plan, double D,
                               const ThresholdDomain& domain);

VerificationReport verify_theorem1(const solver::TimeSeries& series,
                                   const SequencePlan1& plan, double D,
                                   int samples = 50);

VerificationReport verify_theorem2(const solver::TimeSeries& series,
                                   const SequencePlan2& plan, double D,
                                   int samples = 50);

struct AsymptoticsRow {
    double D;
    int n;          // 1-based steady-front index
    double t_n;     // settling time
    double q_n;     // hi - x_n
    double y_hat;   // q_n / (2 sqrt(D t_n))
    bool determined;
};

struct AsymptoticsTable {
    std::vector<AsymptoticsRow> rows;
    std::string to_csv() const;
};

/// Scenario of the steady-front asymptotics: eps = sqrt(D)/10, v0 = sqrt(D),
/// w0 = hi - sqrt(D)/10, uniform initial configuration (+1).
solver::ModelParams asymptotics_params(double D, const ThresholdDomain& domain,
                                       int grid_n = 4000);
solver::InitialData asymptotics_initial(double D, const ThresholdDomain& domain);

AsymptoticsTable asymptotics_experiment(const std::vector<double>& D_list,
                                        const ThresholdDomain& domain, int n_fronts,
                                        double horizon = 45.0, int grid_n = 4000);

}  // namespace relaydiff::experiments
