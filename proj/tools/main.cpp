#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "relaydiff/experiments.hpp"
#include "relaydiff/fronts.hpp"
#include "relaydiff/kernels.hpp"
#include "relaydiff/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace relaydiff;

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DomainError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DomainError(path + ": " + e.what());
    }
}

void write_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw DomainError("cannot write " + path.string());
    out << text;
}

ThresholdDomain domain_from(const json& j) {
    return ThresholdDomain(j.at("lo").get<double>(), j.at("hi").get<double>());
}

hysteresis::SimpleConfig config_from(const json& j, const ThresholdDomain& dom) {
    std::vector<double> fronts;
    if (j.contains("fronts"))
        fronts = j.at("fronts").get<std::vector<double>>();
    int upper = j.value("upper_sign", 1);
    return hysteresis::SimpleConfig(dom.lo, dom.hi, fronts, upper);
}

struct Scenario {
    solver::ModelParams params;
    solver::InitialData data;
    solver::RunControl control;
};

Scenario scenario_from(const json& j) {
    ThresholdDomain dom = domain_from(j.at("domain"));
    solver::ModelParams params{dom, j.at("D").get<double>()};
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        params.grid_n = g.value("n", params.grid_n);
        params.grid_grading = g.value("grading", params.grid_grading);
    }
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        params.dt_init = t.value("dt_init", params.dt_init);
        params.dt_max = t.value("dt_max", params.dt_max);
        params.dw_max = t.value("dw_max", params.dw_max);
        params.tol_event = t.value("tol_event", params.tol_event);
        params.tol_series = t.value("tol_series", params.tol_series);
    }

    solver::InitialData data;
    data.r0 = hysteresis::SimpleConfig::uniform(dom.lo, dom.hi, 1);
    if (j.contains("initial")) {
        const auto& ini = j.at("initial");
        std::string kind = ini.value("u0_kind", "bump");
        if (kind == "uniform")
            data.u0_kind = solver::U0Kind::Uniform;
        else if (kind == "bump")
            data.u0_kind = solver::U0Kind::Bump;
        else if (kind == "custom")
            data.u0_kind = solver::U0Kind::Custom;
        else
            throw DomainError("initial.u0_kind must be uniform|bump|custom");
        data.eps = ini.value("eps", data.eps);
        data.v0 = ini.value("v0", data.v0);
        data.w0 = ini.value("w0", data.w0);
        if (ini.contains("u0"))
            data.u0 = ini.at("u0").get<std::vector<double>>();
        if (ini.contains("r0"))
            data.r0 = config_from(ini.at("r0"), dom);
        data.require_bump_family = ini.value("require_bump_family", false);
    }

    solver::RunControl control;
    if (j.contains("run")) {
        const auto& r = j.at("run");
        control.T = r.value("T", control.T);
        control.v_min = r.value("v_min", control.v_min);
        control.cadence = r.value("cadence", control.cadence);
        std::string stop = r.value("stop", "fixed_t");
        if (stop == "fixed_t")
            control.stop = solver::StopRule::FixedT;
        else if (stop == "v_min")
            control.stop = solver::StopRule::VMin;
        else if (stop == "flat")
            control.stop = solver::StopRule::Flat;
        else
            throw DomainError("run.stop must be fixed_t|v_min|flat");
        if (r.contains("probes"))
            control.probes = r.at("probes").get<std::vector<double>>();
        if (r.contains("snapshot_times"))
            control.snapshot_times = r.at("snapshot_times").get<std::vector<double>>();
    }
    return {params, data, control};
}

json series_to_json(const solver::TimeSeries& ts) {
    json j;
    j["grid_x"] = ts.grid.x;
    j["probe_x"] = ts.probe_x;
    j["v0"] = ts.v0;
    j["records"] = json::array();
    for (const auto& r : ts.records)
        j["records"].push_back({{"t", r.t},
                                {"v", r.v},
                                {"w", r.w},
                                {"U_bar", r.U_bar},
                                {"leftmost_front", r.leftmost_front},
                                {"fronts", r.fronts},
                                {"upper_sign", r.upper_sign},
                                {"U_probes", r.U_probes}});
    j["events"] = json::array();
    for (const auto& e : ts.events)
        j["events"].push_back(
            {{"kind", e.kind}, {"t", e.t}, {"position", e.position}, {"u_ratio", e.u_ratio}});
    return j;
}

solver::TimeSeries series_from_json(const json& j) {
    solver::TimeSeries ts;
    ts.grid.x = j.at("grid_x").get<std::vector<double>>();
    ts.probe_x = j.at("probe_x").get<std::vector<double>>();
    ts.v0 = j.value("v0", 0.0);
    for (const auto& r : j.at("records")) {
        solver::SeriesRecord rec;
        rec.t = r.at("t").get<double>();
        rec.v = r.at("v").get<double>();
        rec.w = r.at("w").get<double>();
        rec.U_bar = r.at("U_bar").get<double>();
        rec.leftmost_front = r.at("leftmost_front").get<double>();
        rec.fronts = r.at("fronts").get<std::vector<double>>();
        rec.upper_sign = r.at("upper_sign").get<int>();
        rec.U_probes = r.at("U_probes").get<std::vector<double>>();
        ts.records.push_back(std::move(rec));
    }
    for (const auto& e : j.at("events"))
        ts.events.push_back({e.at("kind").get<std::string>(), e.at("t").get<double>(),
                             e.at("position").get<double>(), e.at("u_ratio").get<double>()});
    return ts;
}

void write_outputs(const solver::TimeSeries& ts, const fs::path& out,
                   const Scenario* scen) {
    fs::create_directories(out);

    std::ostringstream series;
    series << "t,v,w,U_bar,n_fronts,leftmost_front\n";
    for (const auto& r : ts.records)
        series << fmt(r.t) << ',' << fmt(r.v) << ',' << fmt(r.w) << ',' << fmt(r.U_bar)
               << ',' << r.fronts.size() << ',' << fmt(r.leftmost_front) << '\n';
    write_file(out / "series.csv", series.str());

    std::ostringstream events;
    for (const auto& e : ts.events) {
        json je = {{"kind", e.kind}, {"t", e.t}, {"position", e.position},
                   {"U_ratio", e.u_ratio}};
        events << je.dump() << '\n';
    }
    write_file(out / "events.jsonl", events.str());

    for (const auto& [t, u] : ts.u_snapshots) {
        // Reconstruct r at the snapshot time from the nearest record.
        const solver::SeriesRecord* best = &ts.records.front();
        for (const auto& r : ts.records)
            if (std::abs(r.t - t) < std::abs(best->t - t))
                best = &r;
        hysteresis::SimpleConfig cfg(ts.grid.x.front(), ts.grid.x.back(), best->fronts,
                                     best->upper_sign);
        std::ostringstream prof;
        prof << "x,u,r\n";
        for (size_t i = 0; i < ts.grid.x.size(); ++i) {
            double x = ts.grid.x[i];
            int r = (i == 0) ? cfg.sign_at(std::nextafter(x, 1.0)) : cfg.sign_at(x);
            prof << fmt(x) << ',' << fmt(u[i]) << ',' << r << '\n';
        }
        write_file(out / ("profile_" + fmt(t) + ".csv"), prof.str());
    }

    write_file(out / "run.json", series_to_json(ts).dump());

    auto tracks = fronts::track(ts);
    std::ostringstream fcsv;
    fcsv << "track_id,birth_t,death_t,steady_t,x_final,immortal\n";
    double D = scen ? scen->params.D : 0.0;
    auto steady = fronts::steady_fronts(tracks, ts, 1e-2, D > 0 ? D : 1.0, 1e-9);
    for (const auto& tr : tracks) {
        std::string death = tr.death ? fmt(tr.death->first) : "-";
        std::string steady_t = "-";
        for (const auto& s : steady)
            if (s.track_id == tr.id && s.determined)
                steady_t = fmt(s.t);
        fcsv << tr.id << ',' << fmt(tr.birth_time) << ',' << death << ',' << steady_t
             << ',' << fmt(tr.final_position()) << ',' << (tr.immortal ? 1 : 0) << '\n';
    }
    write_file(out / "fronts.csv", fcsv.str());
}

json plan1_to_json(const experiments::SequencePlan1& p) {
    return {{"kind", "thm1"}, {"N", p.N},          {"tau", p.tau},
            {"chi", p.chi},   {"x", p.x},          {"domain", {{"lo", p.domain.lo},
                                                              {"hi", p.domain.hi}}}};
}

experiments::SequencePlan1 plan1_from_json(const json& j) {
    return {j.at("N").get<int>(), j.at("tau").get<std::vector<double>>(),
            j.at("chi").get<std::vector<double>>(), j.at("x").get<std::vector<double>>(),
            domain_from(j.at("domain"))};
}

json plan2_to_json(const experiments::SequencePlan2& p) {
    return {{"kind", "thm2"}, {"N", p.N}, {"t", p.t},
            {"theta", p.theta}, {"y", p.y}, {"mu", p.mu}};
}

experiments::SequencePlan2 plan2_from_json(const json& j) {
    return {j.at("N").get<int>(), j.at("t").get<std::vector<double>>(),
            j.at("theta").get<std::vector<double>>(),
            j.at("y").get<std::vector<double>>(), j.at("mu").get<double>()};
}

int cmd_simulate(const std::string& config, const std::string& out) {
    auto scen = scenario_from(load_json(config));
    auto ts = solver::run(scen.params, scen.data, scen.control);
    write_outputs(ts, out, &scen);
    return 0;
}

int cmd_kernels(const std::string& config, const std::string& out) {
    json j = load_json(config);
    ThresholdDomain dom = domain_from(j.at("domain"));
    auto taus = j.at("taus").get<std::vector<double>>();
    int x_samples = j.value("x_samples", 200);

    std::ostringstream csv;
    csv << "x,tau,psi,phi,Phi_tail,Psi_tail,abs_diff\n";
    for (double tau : taus) {
        for (int i = 0; i <= x_samples; ++i) {
            double x = dom.lo + dom.length() * i / x_samples;
            double ps = kernels::psi(x, tau, dom);
            double ph = kernels::phi(x, tau, dom);
            csv << fmt(x) << ',' << fmt(tau) << ',' << fmt(ps) << ',' << fmt(ph) << ','
                << fmt(kernels::Phi_tail(x, tau, dom)) << ','
                << fmt(kernels::Psi_tail(x, tau, dom)) << ',' << fmt(std::abs(ph - ps))
                << '\n';
        }
    }
    fs::create_directories(out);
    write_file(fs::path(out) / "kernels.csv", csv.str());
    return 0;
}

int cmd_sequences(const std::string& which, int N, double lo, double hi, double mu,
                  const std::string& out) {
    json j;
    bool ok;
    if (which == "thm1") {
        auto plan = experiments::build_sequences_thm1(ThresholdDomain(lo, hi), N);
        ok = experiments::verify_plan1(plan);
        j = plan1_to_json(plan);
    } else {
        auto plan = experiments::build_sequences_thm2(N, mu);
        ok = experiments::verify_plan2(plan);
        j = plan2_to_json(plan);
    }
    j["verified"] = ok;
    fs::create_directories(out);
    write_file(fs::path(out) / ("plan_" + which + ".json"), j.dump(2));
    return ok ? 0 : 1;
}

int cmd_verify(const std::string& which, const std::string& series_path,
               const std::string& plan_path, double D, const std::string& out) {
    auto ts = series_from_json(load_json(series_path));
    json pj = load_json(plan_path);
    experiments::VerificationReport rep;
    if (which == "thm1")
        rep = experiments::verify_theorem1(ts, plan1_from_json(pj), D);
    else
        rep = experiments::verify_theorem2(ts, plan2_from_json(pj), D);
    fs::create_directories(out);
    write_file(fs::path(out) / "report.json", rep.to_json());
    std::cout << (rep.pass ? "PASS" : "FAIL") << " " << rep.scenario << "\n";
    return rep.pass ? 0 : 1;
}

int cmd_asymptotics(const std::string& config, const std::string& out) {
    json j = load_json(config);
    ThresholdDomain dom = domain_from(j.at("domain"));
    auto D_list = j.at("D_list").get<std::vector<double>>();
    int n_fronts = j.value("n_fronts", 3);
    double horizon = j.value("horizon", 45.0);
    int grid_n = j.value("grid_n", 4000);
    auto table = experiments::asymptotics_experiment(D_list, dom, n_fronts, horizon, grid_n);
    fs::create_directories(out);
    write_file(fs::path(out) / "asymptotics.csv", table.to_csv());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distributed-relay reaction-diffusion simulator"};
    app.require_subcommand(1);

    std::string config, out = ".", which, series_path, plan_path;
    int jobs = 1, N = 2;
    unsigned seed = 0;
    double lo = 0.05, hi = 0.25, mu = 0.25, D = 1e-5;
    app.add_option("--jobs", jobs, "worker count for sweeps");
    app.add_option("--seed", seed, "seed for randomized suites");

    auto* sim = app.add_subcommand("simulate", "run one scenario");
    sim->add_option("config,--config", config, "scenario config (json)");
    sim->add_option("--out", out, "output directory");

    auto* ker = app.add_subcommand("kernels", "kernel grid sweep to csv");
    ker->add_option("config,--config", config, "sweep config (json)");
    ker->add_option("--out", out, "output directory");

    auto* seq = app.add_subcommand("sequences", "build an observation schedule");
    seq->add_option("which", which, "thm1|thm2")->required()
        ->check(CLI::IsMember({"thm1", "thm2"}));
    seq->add_option("--n", N, "schedule length");
    seq->add_option("--lo", lo, "domain lower threshold (thm1)");
    seq->add_option("--hi", hi, "domain upper threshold (thm1)");
    seq->add_option("--mu", mu, "decay rate (thm2)");
    seq->add_option("--out", out, "output directory");

    auto* ver = app.add_subcommand("verify", "check a recorded run against a plan");
    ver->add_option("which", which, "thm1|thm2")->required()
        ->check(CLI::IsMember({"thm1", "thm2"}));
    ver->add_option("series", series_path, "run.json from simulate")->required();
    ver->add_option("plan", plan_path, "plan json from sequences")->required();
    ver->add_option("--diffusion", D, "diffusivity of the recorded run");
    ver->add_option("--out", out, "output directory");

    auto* asy = app.add_subcommand("asymptotics", "steady-front table over a D sweep");
    asy->add_option("config,--config", config, "sweep config (json)");
    asy->add_option("--out", out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if ((sim->parsed() || ker->parsed() || asy->parsed()) && config.empty()) {
            std::cerr << "config error: missing config path\n";
            return 2;
        }
        if (sim->parsed())
            return cmd_simulate(config, out);
        if (ker->parsed())
            return cmd_kernels(config, out);
        if (seq->parsed())
            return cmd_sequences(which, N, lo, hi, mu, out);
        if (ver->parsed())
            return cmd_verify(which, series_path, plan_path, D, out);
        if (asy->parsed())
            return cmd_asymptotics(config, out);
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const StructuralError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
