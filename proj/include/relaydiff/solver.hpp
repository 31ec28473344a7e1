#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relaydiff/common.hpp"
#include "relaydiff/hysteresis.hpp"

namespace relaydiff::solver {

/// Node-centered grid on [lo, hi] with dual-cell (trapezoid) weights,
/// optionally refined toward hi where the initial bump and the fronts of
/// interest live.
struct Grid {
    std::vector<double> x;       // nodes, x.front()=lo, x.back()=hi
    std::vector<double> weight;  // quadrature weight per node

    static Grid make(const ThresholdDomain& domain, int n_cells,
                     double grading = 1.0, double refined_fraction = 0.1);

    size_t size() const { return x.size(); }
};

struct ModelParams {
    ThresholdDomain domain;
    double D;
    int grid_n = 4000;
    double grid_grading = 4.0;
    double dt_init = 1e-4;
    double dt_max = 5e-3;
    double dw_max = 5e-3;     // max input travel per step
    double tol_event = 1e-5;  // event localization (in input units)
    double tol_series = 1e-12;

    double mu() const { return 0.5 - domain.hi; }
};

enum class U0Kind { Uniform, Bump, Custom };

struct InitialData {
    U0Kind u0_kind = U0Kind::Bump;
    double eps = 1e-3;            // bump width for the delta-like family
    std::vector<double> u0;       // for Custom, sampled on the run's grid
    double v0 = 0.0;
    double w0 = 0.0;
    hysteresis::SimpleConfig r0;
    bool require_bump_family = false;  // enforce u0 <= eps on [lo, hi-eps]
};

struct SystemState {
    double t = 0.0;
    std::vector<double> u;
    double v = 0.0;
    double w = 0.0;
    hysteresis::SimpleConfig cfg;
};

struct Event {
    std::string kind;  // birth | slide_start | slide_end | collision | full_sweep
    double t;
    double position;
    double u_ratio;  // U(new leftmost)/U_bar at the event (collisions)
};

struct SeriesRecord {
    double t;
    double v;
    double w;
    double U_bar;
    double leftmost_front;  // hi when no fronts
    std::vector<double> fronts;
    int upper_sign;
    std::vector<double> U_probes;  // U(p)/U_bar at the configured probes
};

struct MonitorReport {
    double max_v_envelope_excess = 0.0;   // v/(v0 e^{-mu t}) - 1
    double max_mass_decrease = 0.0;       // per-step decrease of U_bar
    double max_abs_w_excess = 0.0;        // |w| - hi
    double min_u = 0.0;
    double max_conservation_drift = 0.0;  // |U_bar + v - (1+v0)|
};

struct TimeSeries {
    Grid grid;
    std::vector<double> probe_x;
    std::vector<SeriesRecord> records;
    std::vector<Event> events;
    std::vector<std::pair<double, std::vector<double>>> u_snapshots;
    MonitorReport monitors;
    double v0 = 0.0;
};

enum class StopRule { FixedT, VMin, Flat };

struct RunControl {
    double T = 10.0;
    StopRule stop = StopRule::FixedT;
    double v_min = 1e-12;
    double flat_tol = 1e-3;  // sup|u - U_bar/L| threshold for the Flat rule
    double cadence = 0.1;
    std::vector<double> probes;
    std::vector<double> snapshot_times;
};

SystemState init(const ModelParams& params, const Grid& grid, const InitialData& data);

/// One TR-BDF2 step of u_t = D u_xx with zero-flux ends; L-stable and
/// conservative, mass preserved to rounding.
void diffusion_substep(std::vector<double>& u, const Grid& grid, double D, double dt);

/// Total mass and the right-tail cumulative U(x) = \int_x^hi u dy (trapezoid),
/// with linear interpolation between nodes.
struct MassFunctions {
    double U_bar;
    std::vector<double> U;  // at nodes
    const Grid* grid;
    double operator()(double x) const;
};
MassFunctions mass_functions(const std::vector<double>& u, const Grid& grid);

/// f1 = v(1/2+w), f_{-1} = v(1/2-w).
std::pair<double, double> nutrient_split(const SystemState& state);

/// Advances the reaction part over dt with RK4; the relay state seen by the
/// stages follows the input via a virtual monotone segment from w at entry.
/// Returns false (state untouched) if the step must be bisected: input travel
/// above params.dw_max, an input turning point, or a relay event overshooting
/// params.tol_event.
bool reaction_substep(SystemState& state, const Grid& grid, const ModelParams& params,
                      double dt, bool force, std::vector<Event>& events);

/// One Strang step (half diffusion, reaction, half diffusion). Returns false
/// when the reaction stage requests bisection; `force` accepts regardless
/// (used at the minimal step size).
bool step(SystemState& state, const Grid& grid, const ModelParams& params, double dt,
          bool force, std::vector<Event>& events);

TimeSeries run(const ModelParams& params, const InitialData& data, const RunControl& control);

}  // namespace relaydiff::solver
