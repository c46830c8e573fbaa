#include <gtest/gtest.h>

#include <random>

#include "dramdse/action_space.hpp"
#include "dramdse/simulator.hpp"

using namespace dramdse;

namespace {

MemoryTrace one(std::uint64_t cycle, AccessKind k, std::uint64_t addr)
{
    MemoryTrace t;
    t.requests.push_back({cycle, k, addr});
    return t;
}

std::uint64_t addr(std::uint64_t row, std::uint64_t bank, std::uint64_t col = 0)
{
    return (row << 13) | (bank << 10) | col;
}

McConfig closed_norefresh()
{
    McConfig c;
    c.page_policy = PagePolicy::Closed;
    c.refresh_policy = RefreshPolicy::NoRefresh;
    c.max_active_transactions = 128;
    c.request_buffer_size = 8;
    return c;
}

McConfig random_config(std::mt19937_64& rng)
{
    auto space = ActionSpace::full();
    std::uint64_t r = std::uniform_int_distribution<std::uint64_t>(0, space.size() - 1)(rng);
    return space.decode(space.unrank(r));
}

MemoryTrace random_trace(std::mt19937_64& rng)
{
    auto n = std::uniform_int_distribution<std::size_t>(20, 300)(rng);
    auto gap = std::uniform_int_distribution<std::uint64_t>(1, 12)(rng);
    auto seed = rng();
    if (rng() & 1) return gen_random(n, 0x1FFFFFC0, gap, 0.7, seed);
    return gen_streaming(n, 0, 64, gap, 0.7, seed);
}

} // namespace

TEST(Simulator, SingleReadClosedLatency)
{
    DramProfile p;
    auto m = simulate(one(0, AccessKind::Read, addr(5, 2)), closed_norefresh(), p);
    // ACT at 0, READ at t_rcd, data t_cl later for t_burst cycles.
    EXPECT_DOUBLE_EQ(m.latency_ns, (11 + 11 + 4) * 1.25);
    EXPECT_DOUBLE_EQ(m.latency_ns, 32.5);
    EXPECT_EQ(m.total_cycles, 26u);
}

TEST(Simulator, SingleWriteEnergyByHand)
{
    DramProfile p;
    auto m = simulate(one(0, AccessKind::Write, addr(1, 0)), closed_norefresh(), p);
    const double duration_ns = 26 * 1.25;
    const double expect_pj = 1000.0 * (3.0 + 1.3) + 120.0 * duration_ns;
    EXPECT_NEAR(m.energy_pj, expect_pj, 1e-9 * expect_pj);
    EXPECT_NEAR(m.power_mw, expect_pj / duration_ns, 1e-9);
}

TEST(Simulator, RowHitSkipsActivate)
{
    DramProfile p;
    McConfig c = closed_norefresh();
    c.page_policy = PagePolicy::Open;
    MemoryTrace t;
    t.requests.push_back({0, AccessKind::Read, addr(7, 3, 0)});
    t.requests.push_back({100, AccessKind::Read, addr(7, 3, 64)});
    auto r = simulate_detailed(t, c, p);
    EXPECT_EQ(r.timings[0].deliver - 0, 26u);
    EXPECT_EQ(r.timings[1].deliver - 100, 15u); // t_cl + t_burst, no t_rcd
    EXPECT_EQ(r.ledger.activates, 1u);

    c.page_policy = PagePolicy::Closed;
    auto rc = simulate_detailed(t, c, p);
    EXPECT_EQ(rc.timings[1].deliver - 100, 26u);
    EXPECT_EQ(rc.ledger.activates, 2u);
}

TEST(Simulator, BackToBackHitsPipeline)
{
    DramProfile p;
    McConfig c = closed_norefresh();
    c.page_policy = PagePolicy::Open;
    MemoryTrace t;
    t.requests.push_back({0, AccessKind::Read, addr(7, 3, 0)});
    t.requests.push_back({0, AccessKind::Read, addr(7, 3, 64)});
    auto r = simulate_detailed(t, c, p);
    EXPECT_EQ(r.timings[0].complete, 26u);
    EXPECT_EQ(r.timings[1].complete, 30u); // one burst later on the shared bus
}

TEST(Simulator, FifoServesInArrivalOrderFrFcfsPrefersHits)
{
    DramProfile p;
    McConfig c = closed_norefresh();
    c.page_policy = PagePolicy::Open;
    c.scheduler_buffer = SchedulerBuffer::Shared;
    c.arbiter = Arbiter::Simple;
    // Open row 1 of bank 0, then queue a conflict followed by a hit.
    MemoryTrace t;
    t.requests.push_back({0, AccessKind::Read, addr(1, 0, 0)});
    t.requests.push_back({1, AccessKind::Read, addr(2, 0, 0)});
    t.requests.push_back({2, AccessKind::Read, addr(1, 0, 64)});

    c.scheduler = Scheduler::Fifo;
    auto f = simulate_detailed(t, c, p);
    EXPECT_LT(f.timings[1].start, f.timings[2].start);

    c.scheduler = Scheduler::FrFcfs;
    auto fr = simulate_detailed(t, c, p);
    EXPECT_LT(fr.timings[2].start, fr.timings[1].start);
}

TEST(Simulator, FrFcfsGrpKeepsBurstKind)
{
    DramProfile p;
    McConfig c = closed_norefresh();
    c.page_policy = PagePolicy::Open;
    c.scheduler_buffer = SchedulerBuffer::Shared;
    // A read occupies bank 0; an older write and a younger read, both row
    // conflicts on that bank, become ready together when it goes idle.
    MemoryTrace t;
    t.requests.push_back({0, AccessKind::Read, addr(1, 0)});
    t.requests.push_back({1, AccessKind::Write, addr(2, 0)});
    t.requests.push_back({2, AccessKind::Read, addr(3, 0)});

    c.scheduler = Scheduler::FrFcfs;
    auto f = simulate_detailed(t, c, p);
    EXPECT_LT(f.timings[1].start, f.timings[2].start);

    c.scheduler = Scheduler::FrFcfsGrp;
    auto g = simulate_detailed(t, c, p);
    EXPECT_LT(g.timings[2].start, g.timings[1].start);
}

TEST(Simulator, ResponseQueueOrdering)
{
    DramProfile p;
    McConfig c = closed_norefresh();
    c.page_policy = PagePolicy::Open;
    c.scheduler = Scheduler::FrFcfs;
    c.scheduler_buffer = SchedulerBuffer::Shared;
    // Request 1 is a conflict, request 2 a hit that completes first.
    MemoryTrace t;
    t.requests.push_back({0, AccessKind::Read, addr(1, 0, 0)});
    t.requests.push_back({1, AccessKind::Read, addr(2, 0, 0)});
    t.requests.push_back({2, AccessKind::Read, addr(1, 0, 64)});

    c.resp_queue = RespQueue::Fifo;
    auto f = simulate_detailed(t, c, p);
    EXPECT_GE(f.timings[2].deliver, f.timings[1].deliver);
    EXPECT_LT(f.timings[2].complete, f.timings[1].complete);

    c.resp_queue = RespQueue::Reorder;
    auto r = simulate_detailed(t, c, p);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(r.timings[i].deliver, r.timings[i].complete);
    EXPECT_LT(r.timings[2].deliver, r.timings[1].deliver);
}

TEST(Simulator, MaxActiveTransactionsCapsInFlight)
{
    DramProfile p;
    auto t = gen_random(300, 0x1FFFFFC0, 1, 0.5, 4);
    for (int cap : {1, 2, 4, 16}) {
        McConfig c = closed_norefresh();
        c.max_active_transactions = cap;
        c.scheduler_buffer = SchedulerBuffer::Shared;
        auto r = simulate_detailed(t, c, p);
        // Count overlap of [admit, deliver) intervals at every admit instant.
        for (std::size_t i = 0; i < t.size(); ++i) {
            int live = 0;
            for (std::size_t j = 0; j < t.size(); ++j)
                live += r.timings[j].admit <= r.timings[i].admit && r.timings[i].admit < r.timings[j].deliver;
            ASSERT_LE(live, cap);
        }
    }
}

TEST(Simulator, SmallBuffersDelayInjection)
{
    DramProfile p;
    auto t = gen_random(200, 0x1FFFFFC0, 1, 0.7, 2);
    McConfig c = closed_norefresh();
    c.scheduler = Scheduler::Fifo;
    c.scheduler_buffer = SchedulerBuffer::Shared;
    c.request_buffer_size = 1;
    auto small = simulate_detailed(t, c, p);
    c.request_buffer_size = 8;
    auto big = simulate_detailed(t, c, p);
    std::uint64_t delayed = 0;
    for (std::size_t i = 0; i < t.size(); ++i) delayed += small.timings[i].admit > t.requests[i].issue_cycle;
    EXPECT_GT(delayed, 0u);
    EXPECT_LE(big.metrics.latency_ns, small.metrics.latency_ns);
}

TEST(Simulator, ArbiterStagingAddsOneCycle)
{
    DramProfile p;
    McConfig c = closed_norefresh();
    auto t = one(0, AccessKind::Read, addr(3, 1));
    c.arbiter = Arbiter::Simple;
    auto s = simulate(t, c, p);
    c.arbiter = Arbiter::Fifo;
    auto f = simulate(t, c, p);
    EXPECT_DOUBLE_EQ(f.latency_ns - s.latency_ns, 1.25);
}

TEST(Simulator, ReorderArbiterAdmitsTwoPerCycle)
{
    DramProfile p;
    McConfig c = closed_norefresh();
    c.arbiter = Arbiter::Reorder;
    MemoryTrace t;
    for (int i = 0; i < 6; ++i) t.requests.push_back({0, AccessKind::Read, addr(1, static_cast<std::uint64_t>(i))});
    auto r = simulate_detailed(t, c, p);
    EXPECT_EQ(r.timings[0].admit, 0u);
    EXPECT_EQ(r.timings[1].admit, 0u);
    EXPECT_EQ(r.timings[2].admit, 1u);
    c.arbiter = Arbiter::Simple;
    auto s = simulate_detailed(t, c, p);
    EXPECT_EQ(s.timings[1].admit, 1u);
}

TEST(Simulator, RefreshIssuedEveryInterval)
{
    DramProfile p;
    McConfig c = closed_norefresh();
    c.refresh_policy = RefreshPolicy::AllBank;
    // Sparse trace spanning ten refresh intervals: every refresh can run
    // on time, and pull-in may add at most max_pulledin extra.
    auto t = gen_streaming(100, 0, 64, 624, 1.0, 1);
    auto r = simulate_detailed(t, c, p);
    const auto due = r.metrics.total_cycles / static_cast<std::uint64_t>(p.t_refi);
    EXPECT_GE(r.ledger.refreshes + static_cast<std::uint64_t>(c.refresh_max_postponed), due);
    EXPECT_LE(r.ledger.refreshes, due + static_cast<std::uint64_t>(c.refresh_max_pulledin));
    c.refresh_policy = RefreshPolicy::NoRefresh;
    EXPECT_EQ(simulate_detailed(t, c, p).ledger.refreshes, 0u);
}

TEST(Simulator, NoRefreshMakesRefreshKnobsInert)
{
    DramProfile p;
    auto t = gen_random(400, 0x1FFFFFC0, 6, 0.7, 8);
    McConfig a = default_config();
    a.refresh_policy = RefreshPolicy::NoRefresh;
    McConfig b = a;
    b.refresh_max_postponed = 1;
    b.refresh_max_pulledin = 3;
    EXPECT_EQ(simulate(t, a, p), simulate(t, b, p));
}

TEST(Simulator, ErrorsOnBadInputs)
{
    DramProfile p;
    EXPECT_THROW(simulate(MemoryTrace{}, McConfig{}, p), Error);
    McConfig bad;
    bad.max_active_transactions = 3;
    EXPECT_THROW(simulate(one(0, AccessKind::Read, 0), bad, p), Error);
    EXPECT_THROW(simulate(one(0, AccessKind::Read, 1ULL << 40), McConfig{}, p), Error);
    try {
        simulate(MemoryTrace{}, McConfig{}, p);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptyTrace);
    }
}

// Sampled versions of the simulator invariants; the acceptance suite runs
// the larger sweep.
TEST(SimulatorProperties, InvariantsOnRandomInstances)
{
    DramProfile p;
    std::mt19937_64 rng(2024);
    for (int k = 0; k < 40; ++k) {
        auto t = random_trace(rng);
        auto c = random_config(rng);
        auto r1 = simulate_detailed(t, c, p);
        auto r2 = simulate_detailed(t, c, p);
        ASSERT_EQ(r1.metrics, r2.metrics);
        ASSERT_EQ(r1.delivered, t.size());
        const auto& m = r1.metrics;
        ASSERT_GT(m.latency_ns, 0.0);
        ASSERT_GT(m.power_mw, 0.0);
        ASSERT_GT(m.total_cycles, 0u);
        ASSERT_NEAR(r1.ledger.total_pj(), m.energy_pj, 1e-9 * m.energy_pj);
        ASSERT_GE(m.energy_pj, p.p_background_mw * static_cast<double>(m.total_cycles) * p.clock_period_ns);
        for (std::size_t i = 0; i < t.size(); ++i) {
            const auto& tm = r1.timings[i];
            ASSERT_LE(t.requests[i].issue_cycle, tm.admit);
            ASSERT_LE(tm.admit, tm.start);
            ASSERT_LT(tm.start, tm.complete);
            ASSERT_LE(tm.complete, tm.deliver);
        }
    }
}

TEST(Simulator, ReorderArbiterKeepsTraceOrderUnderFifoScheduler)
{
    DramProfile p;
    McConfig c = closed_norefresh();
    c.page_policy = PagePolicy::Open;
    c.arbiter = Arbiter::Reorder;
    c.scheduler = Scheduler::Fifo;
    MemoryTrace t;
    t.requests.push_back({0, AccessKind::Read, addr(1, 0)});
    t.requests.push_back({40, AccessKind::Read, addr(2, 1)});
    t.requests.push_back({40, AccessKind::Read, addr(1, 0, 64)}); // hit on bank 0
    auto r = simulate_detailed(t, c, p);
    EXPECT_LE(r.timings[1].start, r.timings[2].start);
    c.scheduler = Scheduler::FrFcfs;
    auto f = simulate_detailed(t, c, p);
    EXPECT_EQ(f.timings[2].admit, 40u);
}

TEST(SimulatorProperties, LargerBuffersNeverSlowFifoScheduling)
{
    DramProfile p;
    std::mt19937_64 rng(77);
    for (int k = 0; k < 150; ++k) {
        auto t = random_trace(rng);
        auto c = random_config(rng);
        c.scheduler = Scheduler::Fifo;
        double prev = INFINITY;
        for (int rbs = 1; rbs <= 8; ++rbs) {
            c.request_buffer_size = rbs;
            const double lat = simulate(t, c, p).latency_ns;
            ASSERT_LE(lat, prev) << to_string(c);
            prev = lat;
        }
    }
}
