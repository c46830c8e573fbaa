#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dramdse/error.hpp"

namespace dramdse {

enum class PagePolicy : std::uint8_t { Open, OpenAdaptive, Closed, ClosedAdaptive };
enum class Scheduler : std::uint8_t { Fifo, FrFcfsGrp, FrFcfs };
enum class SchedulerBuffer : std::uint8_t { Bankwise, ReadWrite, Shared };
enum class Arbiter : std::uint8_t { Simple, Fifo, Reorder };
enum class RespQueue : std::uint8_t { Fifo, Reorder };
enum class RefreshPolicy : std::uint8_t { NoRefresh, AllBank };

inline constexpr std::array<std::string_view, 4> kPagePolicyNames{"Open", "OpenAdaptive", "Closed", "ClosedAdaptive"};
inline constexpr std::array<std::string_view, 3> kSchedulerNames{"Fifo", "FrFcfsGrp", "FrFcfs"};
inline constexpr std::array<std::string_view, 3> kSchedulerBufferNames{"Bankwise", "ReadWrite", "Shared"};
inline constexpr std::array<std::string_view, 3> kArbiterNames{"Simple", "Fifo", "Reorder"};
inline constexpr std::array<std::string_view, 2> kRespQueueNames{"Fifo", "Reorder"};
inline constexpr std::array<std::string_view, 2> kRefreshPolicyNames{"NoRefresh", "AllBank"};

/// One complete assignment of the ten memory-controller parameters.
struct McConfig {
    int refresh_max_postponed = 1;
    int refresh_max_pulledin = 1;
    int request_buffer_size = 1;
    int max_active_transactions = 1;
    PagePolicy page_policy = PagePolicy::Open;
    Scheduler scheduler = Scheduler::Fifo;
    SchedulerBuffer scheduler_buffer = SchedulerBuffer::Bankwise;
    Arbiter arbiter = Arbiter::Simple;
    RespQueue resp_queue = RespQueue::Fifo;
    RefreshPolicy refresh_policy = RefreshPolicy::NoRefresh;

    friend bool operator==(const McConfig&, const McConfig&) = default;
};

inline constexpr int kNumParams = 10;

/// Parameter names in their canonical (table) order. Factor i of the action
/// space and column i of every sample table refer to kParamNames[i].
inline constexpr std::array<std::string_view, kNumParams> kParamNames{
    "refresh_max_postponed", "refresh_max_pulledin", "request_buffer_size", "max_active_transactions",
    "page_policy",           "scheduler",            "scheduler_buffer",    "arbiter",
    "resp_queue",            "refresh_policy"};

/// Number of admissible values per parameter, in kParamNames order.
inline constexpr std::array<int, kNumParams> kParamCardinality{8, 8, 8, 8, 4, 3, 3, 3, 2, 2};

/// True for the four integer-valued parameters.
inline constexpr bool is_numeric_param(int i) { return i < 4; }

inline constexpr bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

/// Raw integer value of parameter i (numeric value or enumerator ordinal).
inline int param_value(const McConfig& c, int i)
{
    switch (i) {
    case 0: return c.refresh_max_postponed;
    case 1: return c.refresh_max_pulledin;
    case 2: return c.request_buffer_size;
    case 3: return c.max_active_transactions;
    case 4: return static_cast<int>(c.page_policy);
    case 5: return static_cast<int>(c.scheduler);
    case 6: return static_cast<int>(c.scheduler_buffer);
    case 7: return static_cast<int>(c.arbiter);
    case 8: return static_cast<int>(c.resp_queue);
    case 9: return static_cast<int>(c.refresh_policy);
    default: throw Error(ErrorKind::IndexOutOfRange, "parameter index " + std::to_string(i));
    }
}

/// Sets parameter i from its raw integer value without range checks.
inline void set_param_value(McConfig& c, int i, int v)
{
    switch (i) {
    case 0: c.refresh_max_postponed = v; break;
    case 1: c.refresh_max_pulledin = v; break;
    case 2: c.request_buffer_size = v; break;
    case 3: c.max_active_transactions = v; break;
    case 4: c.page_policy = static_cast<PagePolicy>(v); break;
    case 5: c.scheduler = static_cast<Scheduler>(v); break;
    case 6: c.scheduler_buffer = static_cast<SchedulerBuffer>(v); break;
    case 7: c.arbiter = static_cast<Arbiter>(v); break;
    case 8: c.resp_queue = static_cast<RespQueue>(v); break;
    case 9: c.refresh_policy = static_cast<RefreshPolicy>(v); break;
    default: throw Error(ErrorKind::IndexOutOfRange, "parameter index " + std::to_string(i));
    }
}

/// Admissible raw values of parameter i in grid order.
inline std::vector<int> param_grid(int i)
{
    std::vector<int> out;
    if (i == 3) {
        for (int v = 1; v <= 128; v *= 2) out.push_back(v);
    } else if (is_numeric_param(i)) {
        for (int v = 1; v <= 8; ++v) out.push_back(v);
    } else {
        for (int v = 0; v < kParamCardinality[static_cast<std::size_t>(i)]; ++v) out.push_back(v);
    }
    return out;
}

/// Display name of a raw parameter value ("32", "OpenAdaptive", ...).
inline std::string param_value_name(int i, int v)
{
    auto pick = [v](const auto& names) -> std::string {
        if (v < 0 || v >= static_cast<int>(names.size())) return "?" + std::to_string(v);
        return std::string(names[static_cast<std::size_t>(v)]);
    };
    switch (i) {
    case 4: return pick(kPagePolicyNames);
    case 5: return pick(kSchedulerNames);
    case 6: return pick(kSchedulerBufferNames);
    case 7: return pick(kArbiterNames);
    case 8: return pick(kRespQueueNames);
    case 9: return pick(kRefreshPolicyNames);
    default: return std::to_string(v);
    }
}

/// Inverse of param_value_name; accepts the numeric ordinal for categoricals too.
inline std::optional<int> parse_param_value(int i, std::string_view text)
{
    auto find = [text](const auto& names) -> std::optional<int> {
        for (std::size_t k = 0; k < names.size(); ++k)
            if (names[k] == text) return static_cast<int>(k);
        return std::nullopt;
    };
    std::optional<int> r;
    switch (i) {
    case 4: r = find(kPagePolicyNames); break;
    case 5: r = find(kSchedulerNames); break;
    case 6: r = find(kSchedulerBufferNames); break;
    case 7: r = find(kArbiterNames); break;
    case 8: r = find(kRespQueueNames); break;
    case 9: r = find(kRefreshPolicyNames); break;
    default: break;
    }
    if (r) return r;
    try {
        std::size_t pos = 0;
        int v = std::stoi(std::string(text), &pos);
        if (pos == text.size()) return v;
    } catch (const std::exception&) {
    }
    return std::nullopt;
}

/// Returns one message per violated range or grid constraint; empty iff valid.
inline std::vector<std::string> validate_config(const McConfig& c)
{
    std::vector<std::string> out;
    auto range = [&out](std::string_view name, int v, int lo, int hi) {
        if (v < lo || v > hi)
            out.push_back(std::string(name) + "=" + std::to_string(v) + ": out of range [" + std::to_string(lo) +
                          "," + std::to_string(hi) + "]");
    };
    range(kParamNames[0], c.refresh_max_postponed, 1, 8);
    range(kParamNames[1], c.refresh_max_pulledin, 1, 8);
    range(kParamNames[2], c.request_buffer_size, 1, 8);
    range(kParamNames[3], c.max_active_transactions, 1, 128);
    if (!is_power_of_two(c.max_active_transactions))
        out.push_back(std::string(kParamNames[3]) + "=" + std::to_string(c.max_active_transactions) +
                      ": not a power of two");
    for (int i = 4; i < kNumParams; ++i)
        range(kParamNames[static_cast<std::size_t>(i)], param_value(c, i), 0,
              kParamCardinality[static_cast<std::size_t>(i)] - 1);
    return out;
}

inline void require_valid(const McConfig& c)
{
    auto v = validate_config(c);
    if (v.empty()) return;
    std::string msg;
    for (const auto& s : v) msg += (msg.empty() ? "" : "; ") + s;
    throw Error(ErrorKind::InvalidConfig, msg);
}

inline std::string to_string(const McConfig& c)
{
    std::string s;
    for (int i = 0; i < kNumParams; ++i) {
        if (i) s += ' ';
        s += std::string(kParamNames[static_cast<std::size_t>(i)]) + '=' + param_value_name(i, param_value(c, i));
    }
    return s;
}

/// Configuration observed at environment reset: the stock controller setup
/// (deep buffers, open page, FR-FCFS, all-bank refresh).
inline McConfig default_config()
{
    McConfig c;
    c.refresh_max_postponed = 8;
    c.refresh_max_pulledin = 8;
    c.request_buffer_size = 8;
    c.max_active_transactions = 128;
    c.page_policy = PagePolicy::Open;
    c.scheduler = Scheduler::FrFcfs;
    c.scheduler_buffer = SchedulerBuffer::Bankwise;
    c.arbiter = Arbiter::Simple;
    c.resp_queue = RespQueue::Fifo;
    c.refresh_policy = RefreshPolicy::AllBank;
    return c;
}

} // namespace dramdse
