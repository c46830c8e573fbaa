#pragma once

#include <array>
#include <cstdint>

#include "dramdse/env.hpp"

namespace dramdse::agents {

/// Order in which the time-multiplexed agent emits parameters: page policy,
/// then request buffer size, then the rest in table order. Entries are
/// factor indices (kParamNames positions).
inline constexpr std::array<int, kNumParams> kTdmSlotOrder{4, 2, 0, 1, 3, 5, 6, 7, 8, 9};

/// One parameter per timestep. The wrapped environment is stepped only when
/// the tenth slot completes the action; the nine steps before it pay zero.
/// Episodes therefore last episode_len * 10 agent steps.
class TdmEnv {
public:
    explicit TdmEnv(DramEnv env) : env_(std::move(env)) { clear_partial(); }

    Observation reset(std::uint64_t seed = 0)
    {
        slot_ = 0;
        agent_step_ = 0;
        clear_partial();
        return env_.reset(seed);
    }

    int slot() const { return slot_; }
    int factor() const { return kTdmSlotOrder[static_cast<std::size_t>(slot_)]; }
    int agent_step() const { return agent_step_; }
    int episode_agent_steps() const { return env_.episode_len() * kNumParams; }
    const ActionIndices& partial() const { return partial_; }
    const DramEnv& env() const { return env_; }
    DramEnv& env() { return env_; }

    /// Records `choice` for the current slot's factor. On the last slot the
    /// accumulated action is sent to the environment and its reward returned.
    Transition step(int choice)
    {
        const int f = factor();
        if (choice < 0 || choice >= env_.space().cardinality(f))
            throw Error(ErrorKind::IndexOutOfRange, std::string(kParamNames[static_cast<std::size_t>(f)]) +
                                                        " index " + std::to_string(choice) + " out of range");
        partial_[static_cast<std::size_t>(f)] = choice;

        Transition t;
        t.step_index = agent_step_++;
        if (slot_ + 1 < kNumParams) {
            t.observation = env_.last_observation();
            t.next_observation = t.observation;
            t.action = partial_;
            t.reward = 0.0;
            t.done = false;
            ++slot_;
            return t;
        }
        for (int v : partial_)
            if (v < 0) throw Error(ErrorKind::IncompleteAction, "tdm cycle closed with an unset factor");
        Transition inner = env_.step(partial_);
        t.observation = inner.observation;
        t.next_observation = inner.next_observation;
        t.action = inner.action;
        t.reward = inner.reward;
        t.done = inner.done;
        slot_ = 0;
        clear_partial();
        return t;
    }

private:
    void clear_partial() { partial_.fill(-1); }

    DramEnv env_;
    int slot_ = 0;
    int agent_step_ = 0;
    ActionIndices partial_{};
};

} // namespace dramdse::agents
