#include "relaydiff/fronts.hpp"

#include <algorithm>
#include <cmath>

namespace relaydiff::fronts {

std::vector<FrontTrack> track(const solver::TimeSeries& series) {
    if (series.records.empty())
        throw StructuralError("track: empty series");

    std::vector<FrontTrack> tracks;
    std::vector<int> live;  // track indices, leftmost first

    auto spawn = [&](double t, double pos, bool front_of_list) {
        FrontTrack tr;
        tr.id = static_cast<int>(tracks.size());
        tr.birth_time = t;
        tr.trajectory.push_back({t, pos});
        tracks.push_back(std::move(tr));
        if (front_of_list)
            live.insert(live.begin(), tracks.back().id);
        else
            live.push_back(tracks.back().id);
    };

    const auto& first = series.records.front();
    for (double f : first.fronts)
        spawn(first.t, f, false);

    size_t ei = 0;
    size_t ri = 1;
    const auto& events = series.events;
    const auto& records = series.records;

    auto kill = [&](size_t live_idx, double t, double pos) {
        tracks[live[live_idx]].death = {t, pos};
        tracks[live[live_idx]].trajectory.push_back({t, pos});
        live.erase(live.begin() + live_idx);
    };

    while (ei < events.size() || ri < records.size()) {
        bool take_event = ei < events.size() &&
                          (ri >= records.size() || events[ei].t <= records[ri].t);
        if (take_event) {
            const auto& ev = events[ei++];
            if (ev.kind == "birth") {
                spawn(ev.t, ev.position, true);
            } else if (ev.kind == "collision") {
                if (live.size() < 2)
                    throw StructuralError("track: collision with fewer than two fronts");
                kill(0, ev.t, ev.position);
                kill(0, ev.t, ev.position);
            } else if (ev.kind == "absorb") {
                if (live.empty())
                    throw StructuralError("track: absorb with no live front");
                kill(0, ev.t, ev.position);
            } else if (ev.kind == "full_sweep") {
                while (!live.empty())
                    kill(0, ev.t, ev.position);
            } else if (ev.kind == "slide_start" || ev.kind == "slide_end") {
                if (live.empty())
                    throw StructuralError("track: slide with no live front");
                tracks[live[0]].trajectory.push_back({ev.t, ev.position});
            }
        } else {
            const auto& rec = records[ri++];
            if (rec.fronts.size() != live.size())
                throw StructuralError("track: snapshot inconsistent with event log");
            for (size_t i = 0; i < live.size(); ++i)
                tracks[live[i]].trajectory.push_back({rec.t, rec.fronts[i]});
        }
    }
    return tracks;
}

std::vector<CollisionEvent> collisions(const solver::TimeSeries& series) {
    std::vector<CollisionEvent> out;
    for (const auto& ev : series.events)
        if (ev.kind == "collision")
            out.push_back({ev.t, ev.position, ev.u_ratio});
    return out;
}

CollisionCheck check_collision_lemma(const CollisionEvent& ev, double tol) {
    bool pass = ev.u_ratio >= 0.5 - tol;
    std::string witness = "t=" + std::to_string(ev.t) +
                          " U_ratio=" + std::to_string(ev.u_ratio) +
                          " position=" + std::to_string(ev.position);
    return {pass, ev.u_ratio, ev.t, witness};
}

std::vector<int> certify_immortal(std::vector<FrontTrack>& tracks,
                                  const solver::TimeSeries& series, double x_cut,
                                  double t_cut, double tol) {
    // Locate the probe carrying U(x_cut, t)/U_bar(t).
    size_t probe = series.probe_x.size();
    for (size_t i = 0; i < series.probe_x.size(); ++i)
        if (std::abs(series.probe_x[i] - x_cut) < 1e-12)
            probe = i;
    if (probe == series.probe_x.size())
        throw StructuralError("certify_immortal: x_cut is not a recorded probe");

    double sup = 0.0;
    for (const auto& rec : series.records)
        if (rec.t >= t_cut)
            sup = std::max(sup, rec.U_probes[probe]);
    if (!(sup < 0.5 - tol))
        return {};

    std::vector<int> certified;
    for (auto& tr : tracks) {
        if (tr.death && tr.death->first <= t_cut)
            continue;
        if (tr.birth_time > t_cut)
            continue;
        // Position at t_cut: last trajectory sample not after t_cut.
        double pos = tr.trajectory.front().second;
        for (const auto& [t, p] : tr.trajectory) {
            if (t > t_cut)
                break;
            pos = p;
        }
        if (pos >= x_cut) {
            tr.immortal = true;
            tr.immortal_from = t_cut;
            certified.push_back(tr.id);
        }
    }
    return certified;
}

std::vector<SteadyFront> steady_fronts(const std::vector<FrontTrack>& tracks,
                                       const solver::TimeSeries& series, double rel_tol,
                                       double D, double v_min) {
    std::vector<SteadyFront> out;
    double scale = rel_tol * std::sqrt(D);
    double v_end = series.records.back().v;
    for (const auto& tr : tracks) {
        if (tr.death)
            continue;
        double x_final = tr.final_position();
        // First time after which the position stays within scale of final.
        double t_steady = tr.birth_time;
        for (const auto& [t, p] : tr.trajectory)
            if (x_final - p > scale)
                t_steady = t;
        // The input must stay below the front for the rest of the run.
        bool w_ok = true;
        for (const auto& rec : series.records)
            if (rec.t > t_steady && std::abs(rec.w) > x_final + 1e-12)
                w_ok = false;
        bool determined = w_ok && v_end < v_min;
        out.push_back({tr.id, t_steady, x_final, determined});
    }
    std::sort(out.begin(), out.end(),
              [](const SteadyFront& a, const SteadyFront& b) { return a.t < b.t; });
    return out;
}

}  // namespace relaydiff::fronts
