#include <doctest.h>

#include <cmath>

#include "relaydiff/fronts.hpp"

using namespace relaydiff;
using namespace relaydiff::fronts;
using solver::Event;
using solver::SeriesRecord;
using solver::TimeSeries;

namespace {

SeriesRecord rec(double t, std::vector<double> fronts, double v = 1.0, double w = 0.0,
                 std::vector<double> probes = {}) {
    SeriesRecord r;
    r.t = t;
    r.v = v;
    r.w = w;
    r.U_bar = 1.0;
    r.fronts = std::move(fronts);
    r.leftmost_front = r.fronts.empty() ? 0.25 : r.fronts.front();
    r.upper_sign = +1;
    r.U_probes = std::move(probes);
    return r;
}

// One birth, a sliding episode, then a collision removing the two leftmost.
TimeSeries fixture() {
    TimeSeries ts;
    ts.probe_x = {0.15};
    ts.records.push_back(rec(0.0, {0.10, 0.20}, 1.0, 0.0, {0.3}));
    ts.events.push_back({"birth", 0.5, 0.06, 0.8});
    ts.events.push_back({"slide_start", 0.6, 0.07, 0.0});
    ts.events.push_back({"slide_end", 0.9, 0.095, 0.0});
    ts.records.push_back(rec(1.0, {0.095, 0.10, 0.20}, 0.5, 0.095, {0.3}));
    ts.events.push_back({"collision", 1.5, 0.10, 0.7});
    ts.records.push_back(rec(2.0, {0.20}, 1e-13, 0.05, {0.3}));
    ts.v0 = 1.0;
    return ts;
}

}  // namespace

TEST_CASE("frozen configuration yields constant tracks, steady from the start") {
    TimeSeries ts;
    ts.records.push_back(rec(0.0, {0.1, 0.2}));
    ts.records.push_back(rec(1.0, {0.1, 0.2}));
    ts.records.push_back(rec(2.0, {0.1, 0.2}, 1e-14));
    auto tracks = track(ts);
    REQUIRE(tracks.size() == 2);
    for (const auto& tr : tracks) {
        CHECK(!tr.death);
        CHECK(tr.trajectory.front().second == tr.trajectory.back().second);
    }
    auto steady = steady_fronts(tracks, ts, 1e-2, 1e-4, 1e-12);
    REQUIRE(steady.size() == 2);
    for (const auto& s : steady) {
        CHECK(s.t == 0.0);
        CHECK(s.determined);
    }
    CHECK(steady[0].x < steady[1].x);
}

TEST_CASE("synthetic log: birth, slide, collision") {
    auto ts = fixture();
    auto tracks = track(ts);
    REQUIRE(tracks.size() == 3);

    // tracks 0, 1 are the initial fronts; track 2 the born one.
    CHECK(tracks[2].birth_time == 0.5);
    CHECK(tracks[2].trajectory.front().second == doctest::Approx(0.06));
    // The sliding episode moves only the leftmost (the born) front.
    CHECK(tracks[2].final_position() == doctest::Approx(0.10));
    REQUIRE(tracks[2].death);
    CHECK(tracks[2].death->first == doctest::Approx(1.5));
    // The collision also removes the old front at 0.10.
    REQUIRE(tracks[0].death);
    CHECK(tracks[0].death->first == doctest::Approx(1.5));
    CHECK(!tracks[1].death);
    // Monotone trajectories.
    for (const auto& tr : tracks)
        for (size_t i = 0; i + 1 < tr.trajectory.size(); ++i)
            CHECK(tr.trajectory[i].second <= tr.trajectory[i + 1].second + 1e-12);
}

TEST_CASE("inconsistent log is rejected") {
    TimeSeries ts;
    ts.records.push_back(rec(0.0, {0.1}));
    ts.records.push_back(rec(1.0, {0.1, 0.2}));  // front appeared without an event
    CHECK_THROWS_AS(track(ts), StructuralError);

    TimeSeries ts2;
    ts2.records.push_back(rec(0.0, {}));
    ts2.events.push_back({"collision", 0.5, 0.1, 0.9});
    CHECK_THROWS_AS(track(ts2), StructuralError);
}

TEST_CASE("collision lemma check") {
    CHECK(check_collision_lemma({1.0, 0.1, 0.99}, 5e-3).pass);
    CHECK(check_collision_lemma({1.0, 0.1, 0.4999}, 1e-3).pass);  // within tolerance
    auto fail = check_collision_lemma({1.0, 0.1, 0.4}, 5e-3);
    CHECK(!fail.pass);
    CHECK(!fail.witness.empty());

    auto ts = fixture();
    auto evs = collisions(ts);
    REQUIRE(evs.size() == 1);
    CHECK(evs[0].u_ratio == doctest::Approx(0.7));
}

TEST_CASE("immortality certification") {
    auto ts = fixture();
    auto tracks = track(ts);

    // Ratio at the probe is 0.3 < 1/2 - tol: the surviving front at 0.20 is
    // certified; the dead ones are not.
    auto ids = certify_immortal(tracks, ts, 0.15, 1.6, 1e-3);
    REQUIRE(ids.size() == 1);
    CHECK(tracks[ids[0]].final_position() == doctest::Approx(0.20));
    CHECK(tracks[ids[0]].immortal);
    CHECK(tracks[ids[0]].immortal_from == 1.6);

    // Boundary ratio: no certification.
    for (auto& r : ts.records)
        for (auto& p : r.U_probes) p = 0.5;
    auto tracks2 = track(ts);
    CHECK(certify_immortal(tracks2, ts, 0.15, 1.6, 1e-3).empty());

    // Unknown probe position is refused.
    CHECK_THROWS_AS(certify_immortal(tracks, ts, 0.17, 1.6, 1e-3), StructuralError);
}

TEST_CASE("steady front extraction flags undetermined runs") {
    auto ts = fixture();
    auto tracks = track(ts);
    auto steady = steady_fronts(tracks, ts, 1e-2, 1e-4, 1e-12);
    REQUIRE(steady.size() == 1);
    CHECK(steady[0].x == doctest::Approx(0.20));
    CHECK(steady[0].determined);  // v drained below v_min in the fixture

    // Same run but with nutrient left: undetermined.
    ts.records.back().v = 0.5;
    auto steady2 = steady_fronts(tracks, ts, 1e-2, 1e-4, 1e-12);
    REQUIRE(steady2.size() == 1);
    CHECK(!steady2[0].determined);
}
