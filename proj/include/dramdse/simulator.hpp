#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "dramdse/config.hpp"
#include "dramdse/error.hpp"
#include "dramdse/profile.hpp"
#include "dramdse/trace.hpp"

namespace dramdse {

/// Outcome of simulating one trace under one controller configuration.
struct SimMetrics {
    double latency_ns = 0.0; ///< mean issue-to-delivery latency per request
    double power_mw = 0.0;   ///< energy_pj / simulated wall time
    double energy_pj = 0.0;
    std::uint64_t total_cycles = 0;

    friend bool operator==(const SimMetrics&, const SimMetrics&) = default;
};

/// Running account of every energy-bearing event, accumulated as the
/// simulation proceeds. SimMetrics::energy_pj is computed independently from
/// the command counts, so the two must agree.
struct EnergyLedger {
    std::uint64_t activates = 0;
    std::uint64_t reads = 0;
    std::uint64_t writes = 0;
    std::uint64_t refreshes = 0;
    double command_pj = 0.0;
    double background_pj = 0.0;

    double total_pj() const { return command_pj + background_pj; }
};

struct RequestTiming {
    std::uint64_t admit = 0;
    std::uint64_t start = 0;
    std::uint64_t complete = 0;
    std::uint64_t deliver = 0;
};

struct SimResult {
    SimMetrics metrics;
    EnergyLedger ledger;
    std::vector<RequestTiming> timings; ///< indexed like the trace
    std::size_t delivered = 0;
};

namespace detail {

inline constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

// Cycle-driven controller model. One instance per simulate() call.
class ControllerModel {
public:
    ControllerModel(const MemoryTrace& trace, const McConfig& cfg, const DramProfile& p)
        : trace_(trace), cfg_(cfg), p_(p), banks_(static_cast<std::size_t>(p.num_banks))
    {
        const std::size_t n = trace.size();
        reqs_.resize(n);
        result_.timings.resize(n);
        const std::uint64_t col_mask = (std::uint64_t{1} << p.col_bits) - 1;
        (void)col_mask;
        for (std::size_t i = 0; i < n; ++i) {
            const auto a = trace.requests[i].address;
            reqs_[i].bank = static_cast<int>((a >> p.col_bits) & static_cast<std::uint64_t>(p.num_banks - 1));
            reqs_[i].row = a >> (p.col_bits + p.bank_bits);
            reqs_[i].write = trace.requests[i].kind == AccessKind::Write;
        }
        switch (cfg.scheduler_buffer) {
        case SchedulerBuffer::Bankwise: queues_.resize(static_cast<std::size_t>(p.num_banks)); break;
        case SchedulerBuffer::ReadWrite: queues_.resize(2); break;
        case SchedulerBuffer::Shared: queues_.resize(1); break;
        }
        next_deadline_ = static_cast<std::uint64_t>(p.t_refi);
    }

    SimResult run()
    {
        const std::size_t n = trace_.size();
        std::uint64_t now = 0;
        while (result_.delivered < n) {
            bool progressed = false;
            deliver(now);
            resolve_page_decisions(now);
            progressed |= handle_refresh(now);
            progressed |= admit(now);
            progressed |= schedule(now);
            if (queued_ > 0) last_queue_busy_ = now;
            if (result_.delivered >= n) break;
            now = progressed ? now + 1 : std::max(now + 1, next_event(now));
            if (now == kNever) throw Error(ErrorKind::InvalidConfig, "simulation deadlocked");
        }
        finish();
        return std::move(result_);
    }

private:
    struct Req {
        int bank = 0;
        std::uint64_t row = 0;
        bool write = false;
        bool admitted = false;
        bool started = false;
        std::uint64_t admit_seq = 0;
    };

    struct Bank {
        bool open = false;
        std::uint64_t row = 0;
        std::uint64_t act = 0;      // cycle of the last ACT
        std::uint64_t next_col = 0; // earliest next column command on the open row
        std::uint64_t idle_at = 0;  // data of every started access has completed
        std::uint64_t ready = 0;    // precharge / refresh finished
        bool decision_pending = false;
    };

    const MemoryTrace& trace_;
    const McConfig& cfg_;
    const DramProfile& p_;
    std::vector<Req> reqs_;
    std::vector<Bank> banks_;
    std::vector<std::vector<int>> queues_; // request ids in admission order
    std::size_t queued_ = 0;
    std::vector<int> waiting_;      // arrived, not yet admitted (trace order)
    std::size_t next_arrival_ = 0;  // next trace index not yet moved into waiting_
    std::vector<int> in_flight_;    // admitted, not delivered, admission order
    std::uint64_t admit_seq_ = 0;
    std::uint64_t bus_free_ = 0;
    bool bus_used_ = false;
    bool bus_write_ = false;
    std::uint64_t refresh_pending_ = 0;
    std::uint64_t refresh_credit_ = 0;
    std::uint64_t next_deadline_ = 0;
    std::uint64_t refresh_end_ = 0;
    std::uint64_t last_queue_busy_ = 0;
    bool any_queue_activity_ = false;
    std::uint64_t last_deliver_ = 0;
    SimResult result_;

    std::size_t queue_of(int id) const
    {
        const auto& r = reqs_[static_cast<std::size_t>(id)];
        switch (cfg_.scheduler_buffer) {
        case SchedulerBuffer::Bankwise: return static_cast<std::size_t>(r.bank);
        case SchedulerBuffer::ReadWrite: return r.write ? 1 : 0;
        case SchedulerBuffer::Shared: return 0;
        }
        return 0;
    }

    std::uint64_t eligible_cycle(int id) const
    {
        auto c = trace_.requests[static_cast<std::size_t>(id)].issue_cycle;
        return cfg_.arbiter == Arbiter::Fifo ? c + 1 : c;
    }

    void charge(double nj) { result_.ledger.command_pj += nj * 1000.0; }

    // ---- responses -------------------------------------------------------
    void deliver(std::uint64_t now)
    {
        auto& t = result_.timings;
        if (cfg_.resp_queue == RespQueue::Fifo) {
            std::size_t k = 0;
            while (k < in_flight_.size()) {
                int id = in_flight_[k];
                if (!reqs_[static_cast<std::size_t>(id)].started || t[static_cast<std::size_t>(id)].complete > now)
                    break;
                t[static_cast<std::size_t>(id)].deliver = now;
                ++k;
            }
            if (k > 0) {
                last_deliver_ = now;
                result_.delivered += k;
                in_flight_.erase(in_flight_.begin(), in_flight_.begin() + static_cast<std::ptrdiff_t>(k));
            }
        } else {
            auto done = [&](int id) {
                return reqs_[static_cast<std::size_t>(id)].started && t[static_cast<std::size_t>(id)].complete <= now;
            };
            std::size_t before = in_flight_.size();
            for (int id : in_flight_)
                if (done(id)) t[static_cast<std::size_t>(id)].deliver = t[static_cast<std::size_t>(id)].complete;
            in_flight_.erase(std::remove_if(in_flight_.begin(), in_flight_.end(), done), in_flight_.end());
            if (in_flight_.size() != before) {
                last_deliver_ = now;
                result_.delivered += before - in_flight_.size();
            }
        }
    }

    // ---- adaptive page policies -----------------------------------------
    bool pending_same_row(int bank, std::uint64_t row) const
    {
        for (const auto& q : queues_)
            for (int id : q) {
                const auto& r = reqs_[static_cast<std::size_t>(id)];
                if (r.bank == bank && r.row == row) return true;
            }
        return false;
    }

    bool pending_other_row(int bank, std::uint64_t row) const
    {
        for (const auto& q : queues_)
            for (int id : q) {
                const auto& r = reqs_[static_cast<std::size_t>(id)];
                if (r.bank == bank && r.row != row) return true;
            }
        return false;
    }

    void precharge(Bank& b, std::uint64_t at)
    {
        std::uint64_t pre = std::max(at, b.act + static_cast<std::uint64_t>(p_.t_ras));
        b.ready = pre + static_cast<std::uint64_t>(p_.t_rp);
        b.open = false;
    }

    void resolve_page_decisions(std::uint64_t now)
    {
        for (std::size_t bi = 0; bi < banks_.size(); ++bi) {
            auto& b = banks_[bi];
            if (!b.decision_pending || b.idle_at > now) continue;
            b.decision_pending = false;
            const int bank = static_cast<int>(bi);
            bool hit_waiting = pending_same_row(bank, b.row);
            bool close = cfg_.page_policy == PagePolicy::ClosedAdaptive
                             ? !hit_waiting
                             : (!hit_waiting && pending_other_row(bank, b.row));
            if (close) precharge(b, now);
        }
    }

    // ---- refresh ---------------------------------------------------------
    bool banks_quiescent(std::uint64_t now) const
    {
        for (const auto& b : banks_)
            if (b.idle_at > now || b.ready > now || b.decision_pending) return false;
        return true;
    }

    std::uint64_t idle_since() const
    {
        std::uint64_t t = refresh_end_;
        for (const auto& b : banks_) t = std::max({t, b.idle_at, b.ready});
        if (any_queue_activity_) t = std::max(t, last_queue_busy_ + 1);
        return t;
    }

    bool refresh_forced() const
    {
        return refresh_pending_ > static_cast<std::uint64_t>(cfg_.refresh_max_postponed);
    }

    void issue_refresh(std::uint64_t now)
    {
        bool any_open = std::any_of(banks_.begin(), banks_.end(), [](const Bank& b) { return b.open; });
        std::uint64_t start = now + (any_open ? static_cast<std::uint64_t>(p_.t_rp) : 0);
        refresh_end_ = start + static_cast<std::uint64_t>(p_.t_rfc);
        for (auto& b : banks_) {
            b.open = false;
            b.ready = refresh_end_;
            b.next_col = refresh_end_;
        }
        ++result_.ledger.refreshes;
        charge(p_.e_ref_nj);
    }

    bool handle_refresh(std::uint64_t now)
    {
        if (cfg_.refresh_policy == RefreshPolicy::NoRefresh) return false;
        while (now >= next_deadline_) {
            if (refresh_credit_ > 0)
                --refresh_credit_;
            else
                ++refresh_pending_;
            next_deadline_ += static_cast<std::uint64_t>(p_.t_refi);
        }
        if (!banks_quiescent(now)) return false;
        if (refresh_pending_ > 0 && (refresh_forced() || queued_ == 0)) {
            --refresh_pending_;
            issue_refresh(now);
            return true;
        }
        if (refresh_pending_ == 0 && queued_ == 0 &&
            refresh_credit_ < static_cast<std::uint64_t>(cfg_.refresh_max_pulledin) &&
            now >= idle_since() + static_cast<std::uint64_t>(p_.t_rfc)) {
            ++refresh_credit_;
            issue_refresh(now);
            return true;
        }
        return false;
    }

    // ---- admission (arbiter) ---------------------------------------------
    void pull_arrivals(std::uint64_t now)
    {
        while (next_arrival_ < trace_.size() && eligible_cycle(static_cast<int>(next_arrival_)) <= now)
            waiting_.push_back(static_cast<int>(next_arrival_++));
    }

    bool can_admit(int id) const
    {
        return in_flight_.size() < static_cast<std::size_t>(cfg_.max_active_transactions) &&
               queues_[queue_of(id)].size() < static_cast<std::size_t>(cfg_.request_buffer_size);
    }

    void admit_one(std::size_t waiting_pos, std::uint64_t now)
    {
        int id = waiting_[waiting_pos];
        waiting_.erase(waiting_.begin() + static_cast<std::ptrdiff_t>(waiting_pos));
        auto& r = reqs_[static_cast<std::size_t>(id)];
        r.admitted = true;
        r.admit_seq = admit_seq_++;
        result_.timings[static_cast<std::size_t>(id)].admit = now;
        queues_[queue_of(id)].push_back(id);
        ++queued_;
        any_queue_activity_ = true;
        in_flight_.push_back(id);
    }

    bool admit(std::uint64_t now)
    {
        pull_arrivals(now);
        if (waiting_.empty()) return false;
        if (cfg_.arbiter != Arbiter::Reorder) {
            if (!can_admit(waiting_.front())) return false;
            admit_one(0, now);
            return true;
        }
        int admitted = 0;
        // A Fifo scheduler serves in arrival order, so there is nothing to
        // gain from hit-first admission; keep the two-per-cycle rate only.
        if (cfg_.scheduler == Scheduler::Fifo) {
            while (admitted < 2 && !waiting_.empty() && can_admit(waiting_.front())) {
                admit_one(0, now);
                ++admitted;
            }
            return admitted > 0;
        }
        constexpr std::size_t kWindow = 8;
        for (int pass = 0; pass < 2 && admitted < 2; ++pass) {
            for (std::size_t k = 0; k < std::min(kWindow, waiting_.size()) && admitted < 2;) {
                int id = waiting_[k];
                const auto& r = reqs_[static_cast<std::size_t>(id)];
                const auto& b = banks_[static_cast<std::size_t>(r.bank)];
                bool hit = b.open && b.row == r.row;
                if ((pass == 0) == hit && can_admit(id)) {
                    admit_one(k, now);
                    ++admitted;
                } else {
                    ++k;
                }
            }
        }
        return admitted > 0;
    }

    // ---- scheduling --------------------------------------------------------
    bool is_hit(const Req& r) const
    {
        const auto& b = banks_[static_cast<std::size_t>(r.bank)];
        return b.open && b.row == r.row;
    }

    bool eligible(const Req& r, std::uint64_t now) const
    {
        const auto& b = banks_[static_cast<std::size_t>(r.bank)];
        if (b.open && b.row == r.row) return b.next_col <= now;
        if (b.open) return b.idle_at <= now && !b.decision_pending;
        // A closed bank takes the request at once; the activate waits out
        // any precharge still in progress, as a row conflict would.
        return true;
    }

    void start(int id, std::uint64_t now)
    {
        auto& r = reqs_[static_cast<std::size_t>(id)];
        auto& b = banks_[static_cast<std::size_t>(r.bank)];
        const auto tRCD = static_cast<std::uint64_t>(p_.t_rcd);
        const auto tRP = static_cast<std::uint64_t>(p_.t_rp);
        const auto tCL = static_cast<std::uint64_t>(p_.t_cl);
        const auto tBURST = static_cast<std::uint64_t>(p_.t_burst);

        std::uint64_t col;
        if (b.open && b.row == r.row) {
            col = std::max(now, b.next_col);
        } else {
            std::uint64_t act;
            if (b.open) {
                std::uint64_t pre = std::max(now, b.act + static_cast<std::uint64_t>(p_.t_ras));
                act = pre + tRP;
            } else {
                act = std::max(now, b.ready);
            }
            b.act = act;
            b.open = true;
            b.row = r.row;
            col = act + tRCD;
            ++result_.ledger.activates;
            charge(p_.e_act_pre_nj);
        }

        std::uint64_t bus_ready = bus_free_;
        if (bus_used_ && bus_write_ != r.write) bus_ready += tBURST; // read/write turnaround
        std::uint64_t data = std::max(col + tCL, bus_ready);
        col = data - tCL;
        std::uint64_t complete = data + tBURST;
        bus_free_ = complete;
        bus_used_ = true;
        bus_write_ = r.write;

        b.next_col = col + tBURST;
        b.idle_at = std::max(b.idle_at, complete);
        switch (cfg_.page_policy) {
        case PagePolicy::Open: break;
        case PagePolicy::Closed: precharge(b, col + tBURST); break;
        case PagePolicy::OpenAdaptive:
        case PagePolicy::ClosedAdaptive: b.decision_pending = true; break;
        }

        if (r.write) {
            ++result_.ledger.writes;
            charge(p_.e_wr_nj);
        } else {
            ++result_.ledger.reads;
            charge(p_.e_rd_nj);
        }

        r.started = true;
        auto& t = result_.timings[static_cast<std::size_t>(id)];
        t.start = now;
        t.complete = complete;

        auto& q = queues_[queue_of(id)];
        q.erase(std::find(q.begin(), q.end(), id));
        --queued_;
    }

    bool schedule(std::uint64_t now)
    {
        if (queued_ == 0 || refresh_forced() || refresh_end_ > now) return false;

        int best = -1;
        auto better = [&](int a, int cur, bool prefer_kind, bool want_write) {
            if (cur < 0) return true;
            const auto& ra = reqs_[static_cast<std::size_t>(a)];
            const auto& rc = reqs_[static_cast<std::size_t>(cur)];
            if (prefer_kind) {
                bool ka = ra.write == want_write, kc = rc.write == want_write;
                if (ka != kc) return ka;
            }
            bool ha = is_hit(ra), hc = is_hit(rc);
            if (ha != hc) return ha;
            return ra.admit_seq < rc.admit_seq;
        };

        if (cfg_.scheduler == Scheduler::Fifo) {
            for (const auto& q : queues_)
                for (int id : q)
                    if (best < 0 || reqs_[static_cast<std::size_t>(id)].admit_seq <
                                        reqs_[static_cast<std::size_t>(best)].admit_seq)
                        best = id;
            if (best < 0 || !eligible(reqs_[static_cast<std::size_t>(best)], now)) return false;
        } else {
            const bool grp = cfg_.scheduler == Scheduler::FrFcfsGrp && bus_used_;
            for (const auto& q : queues_)
                for (int id : q) {
                    const auto& r = reqs_[static_cast<std::size_t>(id)];
                    if (eligible(r, now) && better(id, best, grp, bus_write_)) best = id;
                }
            if (best < 0) return false;
        }
        start(best, now);
        return true;
    }

    // ---- time advance --------------------------------------------------
    std::uint64_t next_event(std::uint64_t now) const
    {
        std::uint64_t t = kNever;
        auto consider = [&](std::uint64_t c) {
            if (c > now) t = std::min(t, c);
        };
        if (next_arrival_ < trace_.size()) consider(eligible_cycle(static_cast<int>(next_arrival_)));
        for (const auto& b : banks_) {
            consider(b.next_col);
            consider(b.idle_at);
            consider(b.ready);
        }
        for (int id : in_flight_)
            if (reqs_[static_cast<std::size_t>(id)].started)
                consider(result_.timings[static_cast<std::size_t>(id)].complete);
        if (cfg_.refresh_policy == RefreshPolicy::AllBank) {
            consider(next_deadline_);
            consider(refresh_end_);
            if (refresh_credit_ < static_cast<std::uint64_t>(cfg_.refresh_max_pulledin))
                consider(idle_since() + static_cast<std::uint64_t>(p_.t_rfc));
        }
        return t;
    }

    void finish()
    {
        auto& m = result_.metrics;
        auto& l = result_.ledger;
        const std::size_t n = trace_.size();
        double lat_cycles = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            lat_cycles += static_cast<double>(result_.timings[i].deliver - trace_.requests[i].issue_cycle);
        m.total_cycles = std::max<std::uint64_t>(last_deliver_, 1);
        const double duration_ns = static_cast<double>(m.total_cycles) * p_.clock_period_ns;
        m.latency_ns = lat_cycles / static_cast<double>(n) * p_.clock_period_ns;
        l.background_pj = p_.p_background_mw * duration_ns;
        const double command_pj = 1000.0 * (static_cast<double>(l.activates) * p_.e_act_pre_nj +
                                            static_cast<double>(l.reads) * p_.e_rd_nj +
                                            static_cast<double>(l.writes) * p_.e_wr_nj +
                                            static_cast<double>(l.refreshes) * p_.e_ref_nj);
        m.energy_pj = command_pj + l.background_pj;
        m.power_mw = m.energy_pj / duration_ns;
    }
};

} // namespace detail

/// Full simulation record: metrics, energy ledger and per-request timings.
inline SimResult simulate_detailed(const MemoryTrace& trace, const McConfig& cfg, const DramProfile& profile)
{
    if (trace.empty()) throw Error(ErrorKind::EmptyTrace, "cannot simulate an empty trace");
    require_valid(cfg);
    require_valid(profile);
    check_trace(trace, profile.address_bits());
    return detail::ControllerModel(trace, cfg, profile).run();
}

/// Deterministic map (trace, config, profile) -> <latency, power, energy>.
inline SimMetrics simulate(const MemoryTrace& trace, const McConfig& cfg, const DramProfile& profile)
{
    return simulate_detailed(trace, cfg, profile).metrics;
}

} // namespace dramdse
