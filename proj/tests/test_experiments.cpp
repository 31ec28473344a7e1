#include <doctest.h>

#include <cmath>

#include "relaydiff/experiments.hpp"

using namespace relaydiff;
using namespace relaydiff::experiments;

namespace {
const ThresholdDomain dom(0.05, 0.25);
}

TEST_CASE("thm1 plan, N = 1: inequalities hold on a dense scan") {
    auto plan = build_sequences_thm1(dom, 1);
    REQUIRE(plan.tau.size() == 1);
    REQUIRE(plan.x.size() == 2);
    CHECK(plan.x[0] == doctest::Approx(dom.lo + 0.1 * dom.length()));
    CHECK(plan.chi[0] > 0);
    CHECK(plan.tau[0] > plan.chi[0]);

    CHECK(kernels::Phi_tail(plan.x[0], plan.tau[0], dom) > 0.5);
    // Tail at the next cut stays below 1/2 for all guarded times.
    for (int s = 0; s <= 100; ++s) {
        double tau = (plan.tau[0] - plan.chi[0]) * std::pow(100.0, s / 100.0);
        CHECK(kernels::Phi_tail(plan.x[1], tau, dom) < 0.5);
    }
    CHECK(verify_plan1(plan));
}

TEST_CASE("thm1 plan, N = 3: monotone sequences, independent verification") {
    auto plan = build_sequences_thm1(dom, 3);
    for (int i = 1; i < 3; ++i) {
        CHECK(plan.tau[i] < plan.tau[i - 1] - plan.chi[i - 1]);
        CHECK(plan.x[i] > plan.x[i - 1]);
    }
    CHECK(plan.x[3] > plan.x[2]);
    CHECK(plan.x[3] < dom.hi);
    CHECK(verify_plan1(plan));
}

TEST_CASE("thm1 verifier rejects a corrupted plan") {
    auto plan = build_sequences_thm1(dom, 1);
    auto bad = plan;
    bad.x[1] = bad.x[0] + 1e-4;  // tail mass above 1/2 there
    CHECK(!verify_plan1(bad));
}

TEST_CASE("thm2 plan for mu = 1/4, N = 3") {
    auto plan = build_sequences_thm2(3, 0.25);
    REQUIRE(plan.t.size() == 3);
    REQUIRE(plan.y.size() == 4);
    CHECK(plan.y[0] == 0.0);
    for (int i = 0; i < 3; ++i) {
        CHECK(plan.theta[i] < plan.t[i]);
        CHECK(plan.y[i] < plan.y[i + 1]);
        if (i > 0) CHECK(plan.t[i - 1] < plan.theta[i]);
        CHECK(kernels::erf_E(plan.y[i] / (2 * std::sqrt(plan.theta[i]))) < 0.5);
    }
    CHECK(verify_plan2(plan));
}

TEST_CASE("thm2 verifier rejects a corrupted plan") {
    auto plan = build_sequences_thm2(2, 0.25);
    auto bad = plan;
    bad.y[1] = bad.y[2] + 1.0;  // breaks monotone depths
    CHECK(!verify_plan2(bad));
    auto bad2 = plan;
    bad2.theta[1] = bad2.t[1] + 1.0;
    CHECK(!verify_plan2(bad2));
}

TEST_CASE("probe positions") {
    auto p1 = build_sequences_thm1(dom, 2);
    CHECK(probes_for(p1) == p1.x);
    auto p2 = build_sequences_thm2(2, 0.25);
    auto probes = probes_for(p2, 1e-5, dom);
    REQUIRE(probes.size() == 2);
    for (size_t i = 0; i < probes.size(); ++i)
        CHECK(probes[i] == doctest::Approx(dom.hi - std::sqrt(1e-5) * p2.y[i + 1]));
}

TEST_CASE("asymptotics scenario defaults") {
    double D = 1e-4;
    auto params = asymptotics_params(D, dom);
    CHECK(params.D == D);
    CHECK(params.mu() == doctest::Approx(0.25));
    auto data = asymptotics_initial(D, dom);
    CHECK(data.eps == doctest::Approx(std::sqrt(D) / 10));
    CHECK(data.v0 == doctest::Approx(std::sqrt(D)));
    CHECK(data.w0 == doctest::Approx(dom.hi - std::sqrt(D) / 10));
    CHECK(data.r0.fronts.empty());
    CHECK(data.r0.upper_sign == +1);
    CHECK(data.require_bump_family);
}

TEST_CASE("asymptotics run at coarse D settles ordered fronts") {
    // Coarse, fast configuration: correctness of the plumbing, not accuracy.
    auto table = asymptotics_experiment({1e-4}, dom, 2, 30.0, 1200);
    REQUIRE(table.rows.size() == 2);
    for (const auto& r : table.rows) {
        CHECK(r.D == 1e-4);
        if (std::isnan(r.t_n)) continue;
        CHECK(r.q_n > 0);
        CHECK(r.y_hat > 0);
    }
    if (!std::isnan(table.rows[0].t_n) && !std::isnan(table.rows[1].t_n)) {
        CHECK(table.rows[0].t_n < table.rows[1].t_n);
        CHECK(table.rows[0].q_n < table.rows[1].q_n);
    }
    auto csv = table.to_csv();
    CHECK(csv.rfind("D,n,t_n,q_n,y_hat_n,determined\n", 0) == 0);
}

TEST_CASE("verification report serializes") {
    VerificationReport rep;
    rep.scenario = "theorem1";
    rep.pass = true;
    rep.observations.push_back({1, 10.0, 2, 2, true, true});
    auto j = rep.to_json();
    CHECK(j.find("\"scenario\"") != std::string::npos);
    CHECK(j.find("\"measured_min\"") != std::string::npos);
}
