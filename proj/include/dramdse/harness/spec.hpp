#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dramdse/agents/roster.hpp"
#include "dramdse/kvfile.hpp"
#include "dramdse/profile.hpp"
#include "dramdse/trace.hpp"

namespace dramdse::harness {

// Experiment config, `key = value` with sections. Every key is optional.
//
//   [experiment]
//   modes = marl_ppo, sarl_ppo, sarl_sac, tdm_ppo
//   objectives = low_power, low_latency, joint
//   seeds = 0, 1, 2, 3, 4
//   learning_rates = 1e-5, 2e-5, 2e-4, 1e-4
//   budget = 20000            # environment steps per run
//   eval_interval = 100
//   eval_episodes = 1
//   episode_len = 8
//   space = full              # full | categorical
//   checkpoints = final       # none | final | all
//   output_dir = results
//
//   [trace]     name, kind, n, seed, start_addr, stride, addr_mask,
//               interarrival, read_fraction, path
//   [objective] power_target_fraction, latency_target_fraction,
//               power_target_mw, latency_target_ns, reward_cap
//   [profile]   file = <profile>, then any profile key
//   [network]   hidden = 64, 64
//   [ppo]       PPO hyperparameters by field name
//   [sac]       SAC hyperparameters by field name
//
// Relative paths are taken from the working directory.

enum class CheckpointPolicy { None, Final, All };

struct ObjectiveSpec {
    double power_target_fraction = kDefaultPowerTargetFraction;
    double latency_target_fraction = kDefaultLatencyTargetFraction;
    double power_target_mw = 0.0; // > 0 overrides the fraction
    double latency_target_ns = 0.0;
    double reward_cap = 300.0;
};

struct ExperimentSpec {
    std::vector<agents::Mode> modes{agents::Mode::MarlPpo};
    std::vector<ObjectiveKind> objectives{ObjectiveKind::LowPower};
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    std::vector<double> learning_rates{1e-5, 2e-5, 2e-4, 1e-4};
    std::int64_t budget = 20000;
    int eval_interval = 100;
    int eval_episodes = 1;
    int episode_len = DramEnv::kDefaultEpisodeLen;
    bool categorical_only = false;
    CheckpointPolicy checkpoints = CheckpointPolicy::Final;
    std::string output_dir = "results";

    std::string trace_name; // defaults to the trace kind
    TraceSpec trace;
    ObjectiveSpec objective;
    DramProfile profile;
    agents::AgentOptions agent;

    std::string trace_label() const { return trace_name.empty() ? trace.kind : trace_name; }
};

inline void validate(const ExperimentSpec& s)
{
    auto fail = [](const std::string& m) { throw Error(ErrorKind::ConfigError, m); };
    if (s.modes.empty()) fail("experiment.modes is empty");
    if (s.objectives.empty()) fail("experiment.objectives is empty");
    if (s.seeds.empty()) fail("experiment.seeds is empty");
    if (s.learning_rates.empty()) fail("experiment.learning_rates is empty");
    for (double lr : s.learning_rates)
        if (!(lr > 0.0)) fail("learning rates must be > 0");
    if (s.budget < 0) fail("experiment.budget must be >= 0");
    if (s.eval_interval < 1) fail("experiment.eval_interval must be >= 1");
    if (s.eval_episodes < 1) fail("experiment.eval_episodes must be >= 1");
    if (s.episode_len < 1) fail("experiment.episode_len must be >= 1");
    if (s.agent.hidden.empty()) fail("network.hidden is empty");
    for (int h : s.agent.hidden)
        if (h < 1) fail("network.hidden widths must be >= 1");
    const auto& p = s.agent.ppo;
    if (p.unroll_length < 1 || p.batch_size < p.unroll_length) fail("ppo.batch_size must be >= ppo.unroll_length >= 1");
    if (p.num_minibatches < 1 || p.num_epochs < 1) fail("ppo.num_minibatches and ppo.num_epochs must be >= 1");
    if (p.clip_value) fail("ppo.clip_value = true is not supported");
    const auto& q = s.agent.sac;
    if (q.n_step != 1) fail("sac.n_step other than 1 is not supported");
    if (q.batch_size < 1 || q.update_period < 1 || q.replay_capacity < q.batch_size || q.min_replay_size < q.batch_size)
        fail("sac: need replay_capacity >= batch_size, min_replay_size >= batch_size, update_period >= 1");
    if (!(q.tau > 0.0 && q.tau <= 1.0)) fail("sac.tau must be in (0, 1]");
    if (!(s.objective.reward_cap > 0.0)) fail("objective.reward_cap must be > 0");
}

namespace detail {

template <typename T, typename F>
std::vector<T> parse_list(const KvFile& kv, const std::string& key, std::vector<T> fallback, F&& conv)
{
    if (!kv.has(key)) return fallback;
    std::vector<T> out;
    for (const auto& item : split_list(kv.get(key))) out.push_back(conv(item));
    return out;
}

inline void check_known(const KvFile& kv)
{
    static const std::vector<std::string> known = {
        "experiment.modes", "experiment.objectives", "experiment.seeds", "experiment.learning_rates",
        "experiment.budget", "experiment.eval_interval", "experiment.eval_episodes", "experiment.episode_len",
        "experiment.space", "experiment.checkpoints", "experiment.output_dir",
        "trace.name", "trace.kind", "trace.n", "trace.seed", "trace.start_addr", "trace.stride", "trace.addr_mask",
        "trace.interarrival", "trace.read_fraction", "trace.path",
        "objective.power_target_fraction", "objective.latency_target_fraction", "objective.power_target_mw",
        "objective.latency_target_ns", "objective.reward_cap",
        "network.hidden", "profile.file",
        "ppo.batch_size", "ppo.discount", "ppo.learning_rate", "ppo.adam_epsilon", "ppo.num_minibatches",
        "ppo.unroll_length", "ppo.num_epochs", "ppo.clip_value", "ppo.clipping_epsilon", "ppo.gae_lambda",
        "ppo.entropy_cost", "ppo.value_cost", "ppo.max_gradient_norm", "ppo.prefetch_size",
        "ppo.variable_update_period",
        "sac.batch_size", "sac.discount", "sac.learning_rate", "sac.adam_epsilon", "sac.reward_scale", "sac.n_step",
        "sac.target_entropy", "sac.tau", "sac.initial_log_alpha", "sac.update_period", "sac.replay_capacity",
        "sac.min_replay_size"};
    for (const auto& k : kv.keys()) {
        if (k.rfind("profile.", 0) == 0) continue; // checked by profile_from_kv
        bool ok = false;
        for (const auto& n : known) ok = ok || n == k;
        if (!ok) throw Error(ErrorKind::ConfigError, "unknown config key " + k);
    }
}

} // namespace detail

/// Builds a spec from a parsed config; keys absent from `kv` keep their
/// defaults.
inline ExperimentSpec spec_from_kv(const KvFile& kv)
{
    detail::check_known(kv);
    ExperimentSpec s;
    auto to_u64 = [](const std::string& key, const std::string& v) {
        auto x = KvFile::to_int(key, v);
        if (x < 0) throw Error(ErrorKind::ConfigError, key + " must be >= 0");
        return static_cast<std::uint64_t>(x);
    };

    s.modes = detail::parse_list<agents::Mode>(kv, "experiment.modes", s.modes, agents::parse_mode);
    s.objectives = detail::parse_list<ObjectiveKind>(kv, "experiment.objectives", s.objectives, parse_objective_kind);
    s.seeds = detail::parse_list<std::uint64_t>(kv, "experiment.seeds", s.seeds,
                                                [&](const std::string& v) { return to_u64("experiment.seeds", v); });
    s.learning_rates = detail::parse_list<double>(kv, "experiment.learning_rates", s.learning_rates, [](const std::string& v) {
        return KvFile::to_double("experiment.learning_rates", v);
    });
    s.budget = kv.get_int("experiment.budget", s.budget);
    s.eval_interval = static_cast<int>(kv.get_int("experiment.eval_interval", s.eval_interval));
    s.eval_episodes = static_cast<int>(kv.get_int("experiment.eval_episodes", s.eval_episodes));
    s.episode_len = static_cast<int>(kv.get_int("experiment.episode_len", s.episode_len));
    const auto space = kv.get_or("experiment.space", "full");
    if (space != "full" && space != "categorical")
        throw Error(ErrorKind::ConfigError, "experiment.space must be full or categorical");
    s.categorical_only = space == "categorical";
    const auto ck = kv.get_or("experiment.checkpoints", "final");
    if (ck == "none")
        s.checkpoints = CheckpointPolicy::None;
    else if (ck == "final")
        s.checkpoints = CheckpointPolicy::Final;
    else if (ck == "all")
        s.checkpoints = CheckpointPolicy::All;
    else
        throw Error(ErrorKind::ConfigError, "experiment.checkpoints must be none, final or all");
    s.output_dir = kv.get_or("experiment.output_dir", s.output_dir);

    s.trace_name = kv.get_or("trace.name", "");
    auto& t = s.trace;
    t.kind = kv.get_or("trace.kind", t.kind);
    t.n = static_cast<std::size_t>(to_u64("trace.n", kv.get_or("trace.n", std::to_string(t.n))));
    t.seed = to_u64("trace.seed", kv.get_or("trace.seed", std::to_string(t.seed)));
    t.start_addr = to_u64("trace.start_addr", kv.get_or("trace.start_addr", std::to_string(t.start_addr)));
    t.stride = to_u64("trace.stride", kv.get_or("trace.stride", std::to_string(t.stride)));
    t.addr_mask = to_u64("trace.addr_mask", kv.get_or("trace.addr_mask", std::to_string(t.addr_mask)));
    t.interarrival = to_u64("trace.interarrival", kv.get_or("trace.interarrival", std::to_string(t.interarrival)));
    t.read_fraction = kv.get_double("trace.read_fraction", t.read_fraction);
    t.path = kv.get_or("trace.path", "");

    auto& o = s.objective;
    o.power_target_fraction = kv.get_double("objective.power_target_fraction", o.power_target_fraction);
    o.latency_target_fraction = kv.get_double("objective.latency_target_fraction", o.latency_target_fraction);
    o.power_target_mw = kv.get_double("objective.power_target_mw", o.power_target_mw);
    o.latency_target_ns = kv.get_double("objective.latency_target_ns", o.latency_target_ns);
    o.reward_cap = kv.get_double("objective.reward_cap", o.reward_cap);

    // Profile: optional base file, then inline keys on top.
    KvFile prof;
    if (kv.has("profile.file")) prof = KvFile::load(kv.get("profile.file"));
    for (const auto& k : kv.keys())
        if (k.rfind("profile.", 0) == 0 && k != "profile.file") prof.set(k.substr(8), kv.get(k));
    s.profile = profile_from_kv(prof);

    if (kv.has("network.hidden")) {
        s.agent.hidden.clear();
        for (const auto& h : split_list(kv.get("network.hidden")))
            s.agent.hidden.push_back(static_cast<int>(KvFile::to_int("network.hidden", h)));
    }
    auto& p = s.agent.ppo;
    auto pi = [&](const char* k, int& f) { f = static_cast<int>(kv.get_int(std::string("ppo.") + k, f)); };
    auto pd = [&](const char* k, double& f) { f = kv.get_double(std::string("ppo.") + k, f); };
    pi("batch_size", p.batch_size);
    pd("discount", p.discount);
    pd("learning_rate", p.learning_rate);
    pd("adam_epsilon", p.adam_epsilon);
    pi("num_minibatches", p.num_minibatches);
    pi("unroll_length", p.unroll_length);
    pi("num_epochs", p.num_epochs);
    p.clip_value = kv.get_bool("ppo.clip_value", p.clip_value);
    pd("clipping_epsilon", p.clipping_epsilon);
    pd("gae_lambda", p.gae_lambda);
    pd("entropy_cost", p.entropy_cost);
    pd("value_cost", p.value_cost);
    pd("max_gradient_norm", p.max_gradient_norm);
    pi("prefetch_size", p.prefetch_size);
    pi("variable_update_period", p.variable_update_period);
    auto& q = s.agent.sac;
    auto si = [&](const char* k, int& f) { f = static_cast<int>(kv.get_int(std::string("sac.") + k, f)); };
    auto sd = [&](const char* k, double& f) { f = kv.get_double(std::string("sac.") + k, f); };
    si("batch_size", q.batch_size);
    sd("discount", q.discount);
    sd("learning_rate", q.learning_rate);
    sd("adam_epsilon", q.adam_epsilon);
    sd("reward_scale", q.reward_scale);
    si("n_step", q.n_step);
    sd("target_entropy", q.target_entropy);
    sd("tau", q.tau);
    sd("initial_log_alpha", q.initial_log_alpha);
    si("update_period", q.update_period);
    si("replay_capacity", q.replay_capacity);
    si("min_replay_size", q.min_replay_size);

    validate(s);
    return s;
}

/// Applies "section.key=value" overrides on top of a parsed file.
inline void apply_overrides(KvFile& kv, const std::vector<std::string>& overrides)
{
    for (const auto& o : overrides) {
        auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0)
            throw Error(ErrorKind::ConfigError, "override '" + o + "' is not section.key=value");
        kv.set(std::string(trim(std::string_view(o).substr(0, eq))), std::string(trim(std::string_view(o).substr(eq + 1))));
    }
}

inline ExperimentSpec load_spec(const std::string& path, const std::vector<std::string>& overrides = {})
{
    auto kv = KvFile::load(path);
    apply_overrides(kv, overrides);
    return spec_from_kv(kv);
}

} // namespace dramdse::harness
