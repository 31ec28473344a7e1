#include "relaydiff/solver.hpp"

#include <algorithm>
#include <cmath>

namespace relaydiff::solver {

using hysteresis::MonotoneSegment;
using hysteresis::SimpleConfig;
using hysteresis::SwitchEvent;
using hysteresis::SwitchKind;

Grid Grid::make(const ThresholdDomain& domain, int n_cells, double grading,
                double refined_fraction) {
    if (n_cells < 8)
        throw DomainError("Grid: too few cells");
    Grid g;
    double L = domain.length();
    if (grading <= 1.0 || refined_fraction <= 0.0) {
        g.x.resize(n_cells + 1);
        for (int i = 0; i <= n_cells; ++i)
            g.x[i] = domain.lo + L * i / n_cells;
    } else {
        // Two zones: coarse on [lo, hi - pL], `grading` times finer near hi.
        double p = refined_fraction;
        int n_coarse = std::max(4, static_cast<int>(std::lround(
                           n_cells * (1 - p) / (1 - p + p * grading))));
        int n_fine = n_cells - n_coarse;
        double split = domain.hi - p * L;
        g.x.reserve(n_cells + 1);
        for (int i = 0; i < n_coarse; ++i)
            g.x.push_back(domain.lo + (split - domain.lo) * i / n_coarse);
        for (int i = 0; i <= n_fine; ++i)
            g.x.push_back(split + (domain.hi - split) * i / n_fine);
    }
    size_t n = g.x.size();
    g.weight.assign(n, 0.0);
    for (size_t i = 0; i + 1 < n; ++i) {
        double h = g.x[i + 1] - g.x[i];
        g.weight[i] += h / 2;
        g.weight[i + 1] += h / 2;
    }
    return g;
}

namespace {

// Flux-form discrete Laplacian L u with zero-flux ends (not weighted by the
// dual-cell measure): (L u)_i = F_{i+1/2} - F_{i-1/2}, F = D (u_{i+1}-u_i)/dx.
void apply_flux_laplacian(const std::vector<double>& u, const Grid& grid, double D,
                          std::vector<double>& out) {
    size_t n = grid.size();
    out.assign(n, 0.0);
    for (size_t i = 0; i + 1 < n; ++i) {
        double f = D * (u[i + 1] - u[i]) / (grid.x[i + 1] - grid.x[i]);
        out[i] += f;
        out[i + 1] -= f;
    }
}

// Solve (M/theta_dt - L) u_new = rhs, with M the dual-cell weights; rhs is
// given in the weighted (finite-volume) form.
void implicit_solve(std::vector<double>& u, const Grid& grid, double D,
                    double theta_dt, const std::vector<double>& rhs) {
    size_t n = grid.size();
    static thread_local std::vector<double> a, b, c, r;
    a.assign(n, 0.0);
    b.assign(n, 0.0);
    c.assign(n, 0.0);
    r = rhs;
    for (size_t i = 0; i < n; ++i) {
        double wl = (i > 0) ? D / (grid.x[i] - grid.x[i - 1]) : 0.0;
        double wr = (i + 1 < n) ? D / (grid.x[i + 1] - grid.x[i]) : 0.0;
        a[i] = -wl;
        b[i] = grid.weight[i] / theta_dt + wl + wr;
        c[i] = -wr;
    }
    for (size_t i = 1; i < n; ++i) {
        double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        r[i] -= m * r[i - 1];
    }
    u[n - 1] = r[n - 1] / b[n - 1];
    for (size_t i = n - 1; i-- > 0;)
        u[i] = (r[i] - c[i] * u[i + 1]) / b[i];
}

}  // namespace

void diffusion_substep(std::vector<double>& u, const Grid& grid, double D, double dt) {
    // TR-BDF2 (gamma = 2 - sqrt(2)): L-stable and second order, so sharp
    // initial data does not leave undamped grid-scale oscillations; flux form
    // keeps the total mass exact.
    const double gamma = 2.0 - std::sqrt(2.0);
    size_t n = grid.size();
    static thread_local std::vector<double> lap, rhs, u_mid;

    // Trapezoid over gamma*dt: (M/(gamma dt/2) - L) u_mid = M u/(gamma dt/2) + L u.
    apply_flux_laplacian(u, grid, D, lap);
    rhs.resize(n);
    double th1 = gamma * dt / 2;
    for (size_t i = 0; i < n; ++i)
        rhs[i] = grid.weight[i] * u[i] / th1 + lap[i];
    u_mid.resize(n);
    implicit_solve(u_mid, grid, D, th1, rhs);

    // BDF2 over the rest: (M/th2 - L) u_new = M (c1 u_mid - c2 u)/th2.
    double th2 = (1 - gamma) / (2 - gamma) * dt;
    double c1 = 1.0 / (gamma * (2 - gamma));
    double c2 = (1 - gamma) * (1 - gamma) / (gamma * (2 - gamma));
    for (size_t i = 0; i < n; ++i)
        rhs[i] = grid.weight[i] * (c1 * u_mid[i] - c2 * u[i]) / th2;
    implicit_solve(u, grid, D, th2, rhs);
}

MassFunctions mass_functions(const std::vector<double>& u, const Grid& grid) {
    size_t n = grid.size();
    MassFunctions mf{0.0, std::vector<double>(n, 0.0), &grid};
    for (size_t i = n - 1; i-- > 0;) {
        double h = grid.x[i + 1] - grid.x[i];
        mf.U[i] = mf.U[i + 1] + 0.5 * h * (u[i] + u[i + 1]);
    }
    mf.U_bar = mf.U[0];
    return mf;
}

double MassFunctions::operator()(double x) const {
    const auto& xs = grid->x;
    if (x <= xs.front()) return U.front();
    if (x >= xs.back()) return U.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    size_t i = (it - xs.begin()) - 1;
    double f = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return U[i] * (1 - f) + U[i + 1] * f;
}

std::pair<double, double> nutrient_split(const SystemState& state) {
    return {state.v * (0.5 + state.w), state.v * (0.5 - state.w)};
}

SystemState init(const ModelParams& params, const Grid& grid, const InitialData& data) {
    const auto& dom = params.domain;
    if (std::abs(data.w0) > dom.hi)
        throw DomainError("init: |w0| exceeds the upper threshold");
    if (data.v0 < 0)
        throw DomainError("init: v0 must be nonnegative");
    data.r0.validate();
    if (data.r0.lo != dom.lo || data.r0.hi != dom.hi)
        throw StructuralError("init: r0 domain does not match the model domain");

    size_t n = grid.size();
    std::vector<double> u0(n, 0.0);
    switch (data.u0_kind) {
        case U0Kind::Uniform:
            std::fill(u0.begin(), u0.end(), 1.0 / dom.length());
            break;
        case U0Kind::Bump: {
            if (!(data.eps > 0 && data.eps < dom.length()))
                throw DomainError("init: bump width eps out of range");
            for (size_t i = 0; i < n; ++i)
                u0[i] = (grid.x[i] >= dom.hi - data.eps) ? 1.0 : 0.0;
            break;
        }
        case U0Kind::Custom: {
            if (data.u0.size() != n)
                throw StructuralError("init: custom u0 size does not match the grid");
            u0 = data.u0;
            break;
        }
    }
    double mass = 0.0;
    for (size_t i = 0; i < n; ++i) {
        if (u0[i] < 0)
            throw DomainError("init: u0 must be nonnegative");
        mass += grid.weight[i] * u0[i];
    }
    if (data.u0_kind == U0Kind::Custom && std::abs(mass - 1.0) > 1e-6)
        throw DomainError("init: u0 mass differs from 1 beyond tolerance");
    for (auto& v : u0)
        v /= mass;

    if (data.require_bump_family) {
        for (size_t i = 0; i < n; ++i)
            if (grid.x[i] < dom.hi - data.eps && u0[i] > data.eps + 1e-12)
                throw DomainError("init: u0 violates the delta-closeness family");
    }

    return SystemState{0.0, std::move(u0), data.v0, data.w0, data.r0};
}

namespace {

// Relay sign per node for a given configuration; linear walk over fronts.
void fill_signs(const SimpleConfig& cfg, const Grid& grid, std::vector<double>& r) {
    size_t n = grid.size();
    r.assign(n, 0.0);
    size_t k = cfg.fronts.size();
    double sign = (k % 2 == 0) ? cfg.upper_sign : -cfg.upper_sign;
    size_t fi = 0;
    for (size_t i = 0; i < n; ++i) {
        while (fi < k && grid.x[i] > cfg.fronts[fi]) {
            sign = -sign;
            ++fi;
        }
        r[i] = sign;
    }
}

struct Derivative {
    std::vector<double> du;
    double dv;
    double dw;
};

// Right-hand side of the reaction subsystem. The relay state follows the
// stage input through a virtual monotone segment from the anchor; the
// nutrient drain equals the discrete biomass growth exactly, so U_bar + v is
// conserved to rounding.
void reaction_rhs(const std::vector<double>& u, double v, double w, double w_anchor,
                  const SimpleConfig& cfg0, const Grid& grid, Derivative& d,
                  std::vector<double>& r_scratch) {
    SimpleConfig eff = hysteresis::config_update(cfg0, {w_anchor, w}).first;
    auto mf = mass_functions(u, grid);
    double P = hysteresis::preisach([&mf](double x) { return mf(x); }, eff);
    fill_signs(eff, grid, r_scratch);

    size_t n = grid.size();
    d.du.resize(n);
    double vv = std::max(v, 0.0);
    double growth = 0.0;
    for (size_t i = 0; i < n; ++i) {
        d.du[i] = (0.5 + w * r_scratch[i]) * u[i] * vv;
        growth += grid.weight[i] * d.du[i];
    }
    d.dv = -growth;
    d.dw = -(0.25 - w * w) * P;
}

}  // namespace

bool reaction_substep(SystemState& state, const Grid& grid, const ModelParams& params,
                      double dt, bool force, std::vector<Event>& events) {
    const double hi = params.domain.hi;
    const double lo = params.domain.lo;
    size_t n = grid.size();
    double w0 = state.w;

    static thread_local Derivative k1, k2, k3, k4;
    static thread_local std::vector<double> stage, r_scratch;

    auto combine = [&](const std::vector<double>& base, const Derivative& k, double h,
                       std::vector<double>& out) {
        out.resize(n);
        for (size_t i = 0; i < n; ++i)
            out[i] = base[i] + h * k.du[i];
    };

    reaction_rhs(state.u, state.v, state.w, w0, state.cfg, grid, k1, r_scratch);
    combine(state.u, k1, dt / 2, stage);
    reaction_rhs(stage, state.v + dt / 2 * k1.dv,
                 std::clamp(state.w + dt / 2 * k1.dw, -hi, hi), w0, state.cfg, grid, k2,
                 r_scratch);
    combine(state.u, k2, dt / 2, stage);
    reaction_rhs(stage, state.v + dt / 2 * k2.dv,
                 std::clamp(state.w + dt / 2 * k2.dw, -hi, hi), w0, state.cfg, grid, k3,
                 r_scratch);
    combine(state.u, k3, dt, stage);
    reaction_rhs(stage, state.v + dt * k3.dv, std::clamp(state.w + dt * k3.dw, -hi, hi),
                 w0, state.cfg, grid, k4, r_scratch);

    double w_new = std::clamp(
        w0 + dt / 6 * (k1.dw + 2 * k2.dw + 2 * k3.dw + k4.dw), -hi, hi);

    if (!force) {
        if (std::abs(w_new - w0) > params.dw_max)
            return false;
        // Localize input turning points so deposited fronts sit at the true
        // extremum of w.
        if (k1.dw * k4.dw < 0 && std::abs(w_new - w0) > params.tol_event)
            return false;
        auto probe = hysteresis::config_update(state.cfg, {w0, w_new});
        for (const auto& ev : probe.second) {
            double overshoot = -1.0;
            if (ev.kind == SwitchKind::FrontBirth)
                overshoot = std::abs(w_new) - lo;
            else if (ev.kind == SwitchKind::Collision)
                overshoot = std::abs(w_new) - ev.position;
            if (overshoot > params.tol_event)
                return false;
        }
    }

    // Accept: write back and commit the relay segment.
    for (size_t i = 0; i < n; ++i)
        state.u[i] += dt / 6 * (k1.du[i] + 2 * k2.du[i] + 2 * k3.du[i] + k4.du[i]);
    state.v = std::max(0.0, state.v + dt / 6 * (k1.dv + 2 * k2.dv + 2 * k3.dv + k4.dv));
    state.w = w_new;

    auto [cfg_new, raw] = hysteresis::config_update(state.cfg, {w0, w_new});
    state.cfg = std::move(cfg_new);

    if (!raw.empty()) {
        auto mf = mass_functions(state.u, grid);
        double leftmost = state.cfg.leftmost_front_or_hi();
        double ratio = (mf.U_bar > 0) ? mf(leftmost) / mf.U_bar : 0.0;
        double t_ev = state.t + dt;
        for (const auto& ev : raw) {
            switch (ev.kind) {
                case SwitchKind::Collision:
                    events.push_back({"collision", t_ev, ev.position, ratio});
                    break;
                case SwitchKind::FrontBirth:
                    events.push_back({"birth", t_ev, ev.position, ratio});
                    break;
                case SwitchKind::FullSweep:
                    events.push_back({"full_sweep", t_ev, ev.position, ratio});
                    break;
                case SwitchKind::FrontAbsorb:
                    events.push_back({"absorb", t_ev, ev.position, ratio});
                    break;
                case SwitchKind::FrontSlide:
                    events.push_back({"slide", t_ev, ev.position, ratio});
                    break;
            }
        }
    }
    return true;
}

bool step(SystemState& state, const Grid& grid, const ModelParams& params, double dt,
          bool force, std::vector<Event>& events) {
    if (!(dt > 0))
        throw IntegrationError("step: dt must be positive");
    diffusion_substep(state.u, grid, params.D, dt / 2);
    if (!reaction_substep(state, grid, params, dt, force, events))
        return false;
    diffusion_substep(state.u, grid, params.D, dt / 2);
    state.t += dt;
    return true;
}

namespace {

void record(TimeSeries& series, const SystemState& state, const Grid& grid) {
    auto mf = mass_functions(state.u, grid);
    SeriesRecord rec;
    rec.t = state.t;
    rec.v = state.v;
    rec.w = state.w;
    rec.U_bar = mf.U_bar;
    rec.leftmost_front = state.cfg.leftmost_front_or_hi();
    rec.fronts = state.cfg.fronts;
    rec.upper_sign = state.cfg.upper_sign;
    rec.U_probes.reserve(series.probe_x.size());
    for (double p : series.probe_x)
        rec.U_probes.push_back(mf.U_bar > 0 ? mf(p) / mf.U_bar : 0.0);
    series.records.push_back(std::move(rec));
}

}  // namespace

TimeSeries run(const ModelParams& params, const InitialData& data, const RunControl& control) {
    Grid grid = Grid::make(params.domain, params.grid_n, params.grid_grading);
    SystemState state = init(params, grid, data);

    TimeSeries series;
    series.grid = grid;
    series.probe_x = control.probes;
    series.v0 = data.v0;

    double mass0 = mass_functions(state.u, grid).U_bar;
    double mu = params.mu();

    record(series, state, grid);
    size_t next_snapshot = 0;
    auto snapshot_times = control.snapshot_times;
    std::sort(snapshot_times.begin(), snapshot_times.end());

    double dt = params.dt_init;
    const double dt_min = params.dt_init * 1e-12;
    double next_record = control.cadence;
    double prev_U_bar = mass0;
    bool sliding = false;
    double last_slide_pos = state.cfg.leftmost_front_or_hi();
    double last_slide_t = 0.0;

    while (state.t < control.T) {
        dt = std::min(dt, control.T - state.t);
        SystemState candidate = state;
        std::vector<Event> step_events;
        bool force = dt <= dt_min;
        if (!step(candidate, grid, params, dt, force, step_events)) {
            dt = std::max(dt / 2, dt_min);
            continue;
        }
        state = std::move(candidate);

        // Coalesce per-step slide commits into slide episodes.
        bool slid_now = false;
        bool logged_event = false;
        for (auto& ev : step_events) {
            if (ev.kind == "slide") {
                slid_now = true;
                last_slide_pos = ev.position;
                last_slide_t = ev.t;
                if (!sliding) {
                    series.events.push_back({"slide_start", ev.t, ev.position, ev.u_ratio});
                    logged_event = true;
                }
            } else {
                series.events.push_back(ev);
                logged_event = true;
            }
        }
        if (sliding && !slid_now) {
            series.events.push_back({"slide_end", last_slide_t, last_slide_pos, 0.0});
            logged_event = true;
        }
        sliding = slid_now;

        // Theorem 2.2 monitors.
        auto mf = mass_functions(state.u, grid);
        auto& mon = series.monitors;
        mon.max_mass_decrease = std::max(mon.max_mass_decrease, prev_U_bar - mf.U_bar);
        prev_U_bar = mf.U_bar;
        if (data.v0 > 0) {
            double env = data.v0 * std::exp(-mu * state.t);
            mon.max_v_envelope_excess =
                std::max(mon.max_v_envelope_excess, state.v / env - 1.0);
        }
        mon.max_abs_w_excess =
            std::max(mon.max_abs_w_excess, std::abs(state.w) - params.domain.hi);
        mon.min_u = std::min(mon.min_u, *std::min_element(state.u.begin(), state.u.end()));
        mon.max_conservation_drift = std::max(
            mon.max_conservation_drift, std::abs(mf.U_bar + state.v - (mass0 + data.v0)));

        if (state.t >= next_record || logged_event) {
            record(series, state, grid);
            while (next_record <= state.t)
                next_record += control.cadence;
        }
        while (next_snapshot < snapshot_times.size() &&
               state.t >= snapshot_times[next_snapshot]) {
            series.u_snapshots.emplace_back(state.t, state.u);
            ++next_snapshot;
        }

        if (control.stop != StopRule::FixedT && state.v < control.v_min) {
            if (control.stop == StopRule::VMin)
                break;
            double sup = 0.0;
            double uniform = mf.U_bar / params.domain.length();
            for (double ui : state.u)
                sup = std::max(sup, std::abs(ui - uniform));
            if (sup < control.flat_tol)
                break;
        }

        dt = std::min(dt * 1.2, params.dt_max);
    }

    if (series.records.empty() || series.records.back().t < state.t)
        record(series, state, grid);
    return series;
}

}  // namespace relaydiff::solver
