#pragma once

#include <optional>
#include <string>
#include <vector>

#include "relaydiff/solver.hpp"

namespace relaydiff::fronts {

/// Lifetime record of one front. Positions are non-decreasing in time; a
/// front only dies by collision (or a full sweep of the configuration).
struct FrontTrack {
    int id;
    double birth_time;
    std::vector<std::pair<double, double>> trajectory;  // (t, position)
    std::optional<std::pair<double, double>> death;     // (t, position)
    std::optional<double> steady_since;
    bool immortal = false;
    double immortal_from = 0.0;  // time of the certificate, when immortal

    double final_position() const { return trajectory.back().second; }
};

struct CollisionEvent {
    double t;
    double position;
    double u_ratio;  // U(new leftmost, t)/U_bar(t)
};

struct CollisionCheck {
    bool pass;
    double u_ratio;
    double t;
    std::string witness;
};

/// Rebuild front lifetimes from the event log and the configuration
/// snapshots. Every front of every snapshot belongs to exactly one track.
std::vector<FrontTrack> track(const solver::TimeSeries& series);

std::vector<CollisionEvent> collisions(const solver::TimeSeries& series);

/// U(new leftmost)/U_bar >= 1/2 - tol must hold at every collision.
CollisionCheck check_collision_lemma(const CollisionEvent& ev, double tol);

/// Certify as immortal every track residing in [x_cut, hi) at t_cut,
/// provided sup_{t >= t_cut} U(x_cut,t)/U_bar(t) < 1/2 - tol over the
/// recorded series (a collision there would need a mass ratio >= 1/2).
/// x_cut must be one of the series' probe positions. Returns certified ids
/// and marks the tracks in place.
std::vector<int> certify_immortal(std::vector<FrontTrack>& tracks,
                                  const solver::TimeSeries& series, double x_cut,
                                  double t_cut, double tol);

struct SteadyFront {
    int track_id;
    double t;  // first time the position settled
    double x;  // final position
    bool determined;  // run horizon long enough to certify steadiness
};

/// Extract settled fronts: position change below rel_tol*sqrt(D) after t,
/// |w| stays below the position thereafter, and the run has drained the
/// nutrient below v_min. Ordered by settling time.
std::vector<SteadyFront> steady_fronts(const std::vector<FrontTrack>& tracks,
                                       const solver::TimeSeries& series, double rel_tol,
                                       double D, double v_min);

}  // namespace relaydiff::fronts
