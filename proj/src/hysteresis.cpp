#include "relaydiff/hysteresis.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace relaydiff::hysteresis {

void SimpleConfig::validate() const {
    if (!(lo < hi))
        throw StructuralError("SimpleConfig: lo must be < hi");
    if (upper_sign != 1 && upper_sign != -1)
        throw StructuralError("SimpleConfig: upper_sign must be +1 or -1");
    for (size_t i = 0; i < fronts.size(); ++i) {
        if (!(fronts[i] > lo && fronts[i] < hi))
            throw StructuralError("SimpleConfig: front outside (lo, hi)");
        if (i > 0 && !(fronts[i] > fronts[i - 1]))
            throw StructuralError("SimpleConfig: fronts not strictly increasing");
    }
}

RelaySign SimpleConfig::sign_at(double x) const {
    // r is constant on each (f_{k-1}, f_k]; count fronts >= x.
    auto it = std::lower_bound(fronts.begin(), fronts.end(), x);
    size_t above = fronts.end() - it;
    return (above % 2 == 0) ? upper_sign : -upper_sign;
}

int SimpleConfig::sign_changes_in(double x_lo) const {
    auto it = std::lower_bound(fronts.begin(), fronts.end(), x_lo);
    return static_cast<int>(fronts.end() - it);
}

std::string SimpleConfig::to_json() const {
    nlohmann::json j;
    j["lo"] = lo;
    j["hi"] = hi;
    j["fronts"] = fronts;
    j["upper_sign"] = upper_sign;
    return j.dump();
}

SimpleConfig SimpleConfig::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    return SimpleConfig(j.at("lo").get<double>(), j.at("hi").get<double>(),
                        j.at("fronts").get<std::vector<double>>(),
                        j.at("upper_sign").get<int>());
}

std::pair<SimpleConfig, std::vector<SwitchEvent>>
config_update(const SimpleConfig& cfg, const MonotoneSegment& seg) {
    cfg.validate();
    const double slack = 1e-12;
    if (std::abs(seg.w_from) > cfg.hi + slack || std::abs(seg.w_to) > cfg.hi + slack)
        throw DomainError("config_update: input exceeds the upper threshold");

    std::vector<SwitchEvent> events;

    RelaySign sigma;
    double reach;  // thresholds in (lo, reach] switch to sigma
    if (seg.w_to > seg.w_from && seg.w_to > cfg.lo) {
        sigma = 1;
        reach = std::min(seg.w_to, cfg.hi);
    } else if (seg.w_to < seg.w_from && seg.w_to < -cfg.lo) {
        sigma = -1;
        reach = std::min(-seg.w_to, cfg.hi);
    } else {
        return {cfg, events};  // input stayed inside the bi-stability range
    }

    // Sign just below the leftmost front (the color the input pushes from).
    RelaySign s_low = (cfg.fronts.size() % 2 == 0) ? cfg.upper_sign : -cfg.upper_sign;

    if (reach >= cfg.hi) {
        // Closed semantics: reaching hi recolors everything.
        if (!cfg.fronts.empty() || cfg.upper_sign != sigma)
            events.push_back({SwitchKind::FullSweep, cfg.hi, sigma});
        return {SimpleConfig::uniform(cfg.lo, cfg.hi, sigma), events};
    }

    // Fronts <= reach are swept (closed: a front exactly at reach switches too).
    auto split = std::upper_bound(cfg.fronts.begin(), cfg.fronts.end(), reach);
    std::vector<double> removed(cfg.fronts.begin(), split);
    std::vector<double> kept(split, cfg.fronts.end());

    size_t above = kept.size();
    RelaySign sign_above = (above % 2 == 0) ? cfg.upper_sign : -cfg.upper_sign;
    bool insert = (sign_above != sigma);

    if (sigma == s_low || removed.empty()) {
        // Regular relay motion: pairs of swept fronts annihilate, an odd
        // trailing front slides with the input, no swept front means a birth.
        size_t k = removed.size();
        for (size_t j = 0; j + 1 < k; j += 2)
            events.push_back({SwitchKind::Collision, removed[j + 1], sigma});
        if (k % 2 == 1)
            events.push_back({SwitchKind::FrontSlide, reach, sigma});
        else if (insert)
            events.push_back({SwitchKind::FrontBirth, reach, sigma});
    } else {
        for (double f : removed)
            events.push_back({SwitchKind::FrontAbsorb, f, sigma});
        if (insert)
            events.push_back({SwitchKind::FrontBirth, reach, sigma});
    }

    if (insert)
        kept.insert(kept.begin(), reach);
    return {SimpleConfig(cfg.lo, cfg.hi, std::move(kept), cfg.upper_sign), events};
}

RelaySign brute_force_relay(double x, std::span<const double> w_samples, RelaySign r0) {
    RelaySign state = r0;
    for (double w : w_samples) {
        if (w >= x)
            state = 1;
        else if (w <= -x)
            state = -1;
    }
    return state;
}

double preisach(const std::function<double(double)>& u_cum, const SimpleConfig& cfg) {
    // Telescoping sum over the alternating intervals, top down.
    double total = 0.0;
    double upper_cum = u_cum(cfg.hi);
    RelaySign sign = cfg.upper_sign;
    for (auto it = cfg.fronts.rbegin(); it != cfg.fronts.rend(); ++it) {
        double c = u_cum(*it);
        total += sign * (c - upper_cum);
        upper_cum = c;
        sign = -sign;
    }
    total += sign * (u_cum(cfg.lo) - upper_cum);
    return total;
}

}  // namespace relaydiff::hysteresis
