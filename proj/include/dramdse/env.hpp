#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>

#include "dramdse/action_space.hpp"
#include "dramdse/config.hpp"
#include "dramdse/error.hpp"
#include "dramdse/simulator.hpp"

namespace dramdse {

enum class ObjectiveKind { LowPower, LowLatency, Joint };

inline std::string to_string(ObjectiveKind k)
{
    switch (k) {
    case ObjectiveKind::LowPower: return "low_power";
    case ObjectiveKind::LowLatency: return "low_latency";
    case ObjectiveKind::Joint: return "joint";
    }
    return "?";
}

inline ObjectiveKind parse_objective_kind(const std::string& s)
{
    if (s == "low_power") return ObjectiveKind::LowPower;
    if (s == "low_latency") return ObjectiveKind::LowLatency;
    if (s == "joint") return ObjectiveKind::Joint;
    throw Error(ErrorKind::ConfigError, "unknown objective '" + s + "' (low_power|low_latency|joint)");
}

struct Objective {
    ObjectiveKind kind = ObjectiveKind::LowPower;
    double power_target_mw = 1.0;
    double latency_target_ns = 1.0;
    double reward_cap = 300.0;
};

inline void require_valid(const Objective& o)
{
    if (!(o.power_target_mw > 0) || !(o.latency_target_ns > 0) || !(o.reward_cap > 0))
        throw Error(ErrorKind::ConfigError, "objective targets and reward_cap must be > 0");
}

/// Fractions of the default-config metrics used as targets when none are
/// configured. Both sit below anything the controller can reach on the stock
/// traces, so the reward grows monotonically as the metric falls.
inline constexpr double kDefaultPowerTargetFraction = 0.25;
inline constexpr double kDefaultLatencyTargetFraction = 0.25;

inline Objective objective_from_reference(ObjectiveKind kind, const SimMetrics& reference,
                                          double power_fraction = kDefaultPowerTargetFraction,
                                          double latency_fraction = kDefaultLatencyTargetFraction,
                                          double reward_cap = 300.0)
{
    Objective o;
    o.kind = kind;
    o.power_target_mw = power_fraction * reference.power_mw;
    o.latency_target_ns = latency_fraction * reference.latency_ns;
    o.reward_cap = reward_cap;
    require_valid(o);
    return o;
}

/// target / |target - observed|, with the denominator floored at
/// target / cap so the result never exceeds cap.
inline double axis_reward(double target, double observed, double cap)
{
    double denom = std::max(std::abs(target - observed), target / cap);
    return target / denom;
}

inline double reward(const Objective& o, const SimMetrics& m)
{
    switch (o.kind) {
    case ObjectiveKind::LowPower: return axis_reward(o.power_target_mw, m.power_mw, o.reward_cap);
    case ObjectiveKind::LowLatency: return axis_reward(o.latency_target_ns, m.latency_ns, o.reward_cap);
    case ObjectiveKind::Joint:
        return axis_reward(o.power_target_mw, m.power_mw, o.reward_cap) *
               axis_reward(o.latency_target_ns, m.latency_ns, o.reward_cap);
    }
    return 0.0;
}

/// <latency, power, energy> as produced by the most recent simulation.
struct Observation {
    double latency_ns = 0.0;
    double power_mw = 0.0;
    double energy_pj = 0.0;

    static Observation from(const SimMetrics& m) { return {m.latency_ns, m.power_mw, m.energy_pj}; }

    friend bool operator==(const Observation&, const Observation&) = default;
};

struct Transition {
    Observation observation;
    ActionIndices action{};
    double reward = 0.0;
    Observation next_observation;
    bool done = false;
    int step_index = 0;
};

/// Gym-style wrapper around the simulator. Stateless across steps apart from
/// the step counter: each step simulates the bound trace under the decoded
/// configuration and scores it against the objective.
///
/// Copies share the simulation memo, so rollout workers cloned from one
/// environment simulate each configuration once. Copies must stay on one
/// thread.
class DramEnv {
public:
    static constexpr int kDefaultEpisodeLen = 8;

    DramEnv(std::shared_ptr<const MemoryTrace> trace, DramProfile profile, Objective objective,
            ActionSpace space = ActionSpace::full(), int episode_len = kDefaultEpisodeLen)
        : trace_(std::move(trace)), profile_(profile), objective_(objective), space_(std::move(space)),
          episode_len_(episode_len), cache_(std::make_shared<Cache>())
    {
        if (!trace_ || trace_->empty()) throw Error(ErrorKind::EmptyTrace, "environment needs a non-empty trace");
        if (episode_len_ < 1) throw Error(ErrorKind::ConfigError, "episode_len must be >= 1");
        require_valid(objective_);
        reference_ = metrics_for(default_config());
    }

    /// The environment has no stochastic state; `seed` is accepted for the
    /// gym-style protocol and does not influence the returned observation.
    Observation reset(std::uint64_t seed = 0)
    {
        (void)seed;
        step_ = 0;
        last_ = Observation::from(reference_);
        return last_;
    }

    Transition step(std::span<const int> action)
    {
        if (step_ >= episode_len_) throw Error(ErrorKind::ConfigError, "episode finished; call reset()");
        McConfig cfg = space_.decode(action);
        SimMetrics m = metrics_for(cfg);
        Transition t;
        t.observation = last_;
        std::copy(action.begin(), action.end(), t.action.begin());
        t.reward = dramdse::reward(objective_, m);
        t.next_observation = Observation::from(m);
        t.step_index = step_;
        t.done = ++step_ >= episode_len_;
        last_ = t.next_observation;
        return t;
    }

    /// Observation scaled by the default-config metrics (O(1) network inputs).
    std::array<double, 3> normalized(const Observation& o) const
    {
        return {o.latency_ns / reference_.latency_ns, o.power_mw / reference_.power_mw,
                o.energy_pj / reference_.energy_pj};
    }

    /// Memoized simulate(); the simulator is a pure function of its inputs.
    SimMetrics metrics_for(const McConfig& cfg)
    {
        static const ActionSpace kFull = ActionSpace::full();
        auto key = kFull.rank(kFull.encode(cfg));
        if (auto it = cache_->find(key); it != cache_->end()) return it->second;
        auto m = simulate(*trace_, cfg, profile_);
        cache_->emplace(key, m);
        return m;
    }

    double reward_for(const McConfig& cfg) { return dramdse::reward(objective_, metrics_for(cfg)); }

    const SimMetrics& reference() const { return reference_; }
    const Objective& objective() const { return objective_; }
    const ActionSpace& space() const { return space_; }
    const DramProfile& profile() const { return profile_; }
    const MemoryTrace& trace() const { return *trace_; }
    std::shared_ptr<const MemoryTrace> trace_ptr() const { return trace_; }
    int episode_len() const { return episode_len_; }
    int step_count() const { return step_; }
    const Observation& last_observation() const { return last_; }
    std::size_t simulations() const { return cache_->size(); }

private:
    std::shared_ptr<const MemoryTrace> trace_;
    DramProfile profile_;
    Objective objective_;
    ActionSpace space_;
    int episode_len_;
    int step_ = 0;
    SimMetrics reference_;
    Observation last_;
    using Cache = std::unordered_map<std::uint64_t, SimMetrics>;
    std::shared_ptr<Cache> cache_;
};

} // namespace dramdse
