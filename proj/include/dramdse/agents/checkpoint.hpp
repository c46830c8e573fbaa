#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "dramdse/agents/roster.hpp"
#include "dramdse/csv.hpp"

namespace dramdse::agents {

// Checkpoint text format:
//
//   dramdse-checkpoint 1
//   mode <marl_ppo|sarl_ppo|sarl_sac|tdm_ppo>
//   step <environment steps>
//   tensor <name> <rows> <cols>
//   <rows lines of cols values, %.17g>
//   ...
//
// Network layer l contributes "<net>.w<l>" (out x in) and "<net>.b<l>"
// (out x 1). Nets are agent<i>.actor / agent<i>.critic for PPO and
// sac.actor, sac.q1, sac.q2, sac.target_q1, sac.target_q2 for SAC, which
// also stores sac.log_alpha as a 1 x 1 tensor.

namespace detail {

template <typename F>
void for_each_net(Roster& r, F&& f)
{
    if (r.mode() == Mode::SarlSac) {
        auto& s = r.sac();
        f("sac.actor", s.actor());
        f("sac.q1", s.q1());
        f("sac.q2", s.q2());
        f("sac.target_q1", s.target_q1());
        f("sac.target_q2", s.target_q2());
        return;
    }
    auto& agents = r.ppo_agents();
    for (std::size_t i = 0; i < agents.size(); ++i) {
        f("agent" + std::to_string(i) + ".actor", agents[i].actor());
        f("agent" + std::to_string(i) + ".critic", agents[i].critic());
    }
}

inline void write_tensor(std::string& out, const std::string& name, const learn::Matrix& m)
{
    out += "tensor " + name + " " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
    char buf[32];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            if (j) out += ' ';
            out += buf;
        }
        out += '\n';
    }
}

} // namespace detail

inline std::string checkpoint_to_string(const Roster& roster, std::int64_t step)
{
    std::string out = "dramdse-checkpoint 1\nmode " + to_string(roster.mode()) + "\nstep " + std::to_string(step) + "\n";
    // for_each_net only reads through the references here
    detail::for_each_net(const_cast<Roster&>(roster), [&](const std::string& net, const learn::Mlp& m) {
        for (int l = 0; l < m.num_layers(); ++l) {
            detail::write_tensor(out, net + ".w" + std::to_string(l), m.weight(l));
            detail::write_tensor(out, net + ".b" + std::to_string(l), m.bias(l));
        }
    });
    if (roster.mode() == Mode::SarlSac) {
        learn::Matrix a(1, 1);
        a(0, 0) = roster.sac().log_alpha();
        detail::write_tensor(out, "sac.log_alpha", a);
    }
    return out;
}

/// Loads parameters into a roster built with the same mode, space and
/// network sizes. Returns the recorded step.
inline std::int64_t load_checkpoint(Roster& roster, std::string_view text)
{
    std::istringstream in{std::string(text)};
    auto fail = [](const std::string& msg) -> std::int64_t { throw Error(ErrorKind::ParseError, "checkpoint: " + msg); };
    std::string word, mode;
    int version = 0;
    std::int64_t step = 0;
    if (!(in >> word >> version) || word != "dramdse-checkpoint" || version != 1) fail("bad header");
    if (!(in >> word >> mode) || word != "mode") fail("missing mode");
    if (mode != to_string(roster.mode())) fail("mode " + mode + " does not match roster " + to_string(roster.mode()));
    if (!(in >> word >> step) || word != "step") fail("missing step");

    auto read_tensor = [&](const std::string& name, Eigen::Index rows, Eigen::Index cols) {
        std::string got;
        Eigen::Index r = 0, c = 0;
        if (!(in >> word >> got >> r >> c) || word != "tensor") fail("expected tensor " + name);
        if (got != name) fail("expected tensor " + name + ", found " + got);
        if (r != rows || c != cols)
            throw Error(ErrorKind::ShapeMismatch, "checkpoint: " + name + " is " + std::to_string(r) + "x" +
                                                      std::to_string(c) + ", expected " + std::to_string(rows) + "x" +
                                                      std::to_string(cols));
        learn::Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j)
                if (!(in >> m(i, j))) fail("truncated tensor " + name);
        return m;
    };

    detail::for_each_net(roster, [&](const std::string& net, learn::Mlp& m) {
        for (int l = 0; l < m.num_layers(); ++l) {
            auto w = m.weight(l);
            w = read_tensor(net + ".w" + std::to_string(l), w.rows(), w.cols());
            const auto b = read_tensor(net + ".b" + std::to_string(l), m.bias(l).size(), 1);
            auto off = static_cast<std::size_t>(w.data() - m.params().data() + w.size());
            for (Eigen::Index i = 0; i < b.rows(); ++i) m.params()[off + static_cast<std::size_t>(i)] = b(i, 0);
        }
    });
    if (roster.mode() == Mode::SarlSac) roster.sac().set_log_alpha(read_tensor("sac.log_alpha", 1, 1)(0, 0));
    if (in >> word) fail("trailing data after last tensor");
    return step;
}

inline void save_checkpoint(const Roster& roster, std::int64_t step, const std::string& path)
{
    csv::write_file_atomic(path, checkpoint_to_string(roster, step));
}

inline std::int64_t load_checkpoint_file(Roster& roster, const std::string& path)
{
    return load_checkpoint(roster, csv::read_file(path));
}

} // namespace dramdse::agents
