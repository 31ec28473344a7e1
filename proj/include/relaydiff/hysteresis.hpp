#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relaydiff/common.hpp"

namespace relaydiff::hysteresis {

/// State of a single non-ideal relay, +1 or -1.
using RelaySign = int;

/// One monotone piece of the relay input w(t). Only the endpoints matter
/// (the relay is rate independent); direction is implied by the endpoints.
struct MonotoneSegment {
    double w_from;
    double w_to;
};

enum class SwitchKind {
    FrontBirth,    // a new front appeared where no front was swept
    FrontSlide,    // the leftmost front was dragged outward by the input
    FrontAbsorb,   // a front was swept over and removed
    Collision,     // a pair of fronts annihilated
    FullSweep,     // the whole interval was recolored
};

struct SwitchEvent {
    SwitchKind kind;
    double position;      // front position, or for Collision the new leftmost (hi if none)
    RelaySign new_sign;   // sign written on the swept region
};

/// Piecewise-constant relay configuration r(x) on (lo, hi] stored as an
/// alternating front list. `fronts` are the interior breakpoints, strictly
/// increasing; `upper_sign` is the value of r on the interval adjacent to hi.
/// Signs alternate across fronts by construction.
struct SimpleConfig {
    double lo;
    double hi;
    std::vector<double> fronts;
    RelaySign upper_sign;

    SimpleConfig(double lo_, double hi_, std::vector<double> fronts_, RelaySign upper)
        : lo(lo_), hi(hi_), fronts(std::move(fronts_)), upper_sign(upper) {
        validate();
    }

    // Placeholder state; not valid until assigned. Lets aggregates carrying a
    // configuration be default-constructed.
    SimpleConfig() : lo(0.0), hi(0.0), upper_sign(1) {}

    static SimpleConfig uniform(double lo, double hi, RelaySign sign) {
        return SimpleConfig(lo, hi, {}, sign);
    }

    void validate() const;

    /// r(x) for a threshold x in (lo, hi].
    RelaySign sign_at(double x) const;

    /// Number of fronts in [x_lo, hi), i.e. sign changes of r on that interval.
    int sign_changes_in(double x_lo) const;

    double leftmost_front_or_hi() const { return fronts.empty() ? hi : fronts.front(); }

    std::string to_json() const;
    static SimpleConfig from_json(const std::string& text);
};

/// Feed one monotone input segment to the distributed relay. Thresholds use
/// closed switching conditions: an endpoint exactly equal to a threshold
/// switches it. Returns the updated configuration plus the switch events.
std::pair<SimpleConfig, std::vector<SwitchEvent>>
config_update(const SimpleConfig& cfg, const MonotoneSegment& seg);

/// Literal scan of the three-case relay definition over a sampled input
/// trajectory; the testing oracle for config_update.
RelaySign brute_force_relay(double x, std::span<const double> w_samples, RelaySign r0);

/// Preisach integral P(u,w) = \int u(x) r(x) dx, evaluated exactly from the
/// cumulative mass U(x) = \int_x^hi u dy (piecewise-constant r telescopes).
double preisach(const std::function<double(double)>& u_cum, const SimpleConfig& cfg);

}  // namespace relaydiff::hysteresis
