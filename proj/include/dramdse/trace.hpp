#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dramdse/error.hpp"
#include "dramdse/kvfile.hpp"
#include "dramdse/profile.hpp"
#include "dramdse/rng.hpp"

namespace dramdse {

enum class AccessKind : std::uint8_t { Read, Write };

struct Request {
    std::uint64_t issue_cycle = 0;
    AccessKind kind = AccessKind::Read;
    std::uint64_t address = 0;

    friend bool operator==(const Request&, const Request&) = default;
};

/// Time-ordered request sequence (issue_cycle non-decreasing).
struct MemoryTrace {
    std::vector<Request> requests;

    std::size_t size() const { return requests.size(); }
    bool empty() const { return requests.empty(); }

    friend bool operator==(const MemoryTrace&, const MemoryTrace&) = default;
};

/// Throws AddressOverflow / InvalidConfig when the trace breaks its invariants
/// for the given number of decodable address bits.
inline void check_trace(const MemoryTrace& t, int address_bits)
{
    const std::uint64_t limit = std::uint64_t{1} << address_bits;
    for (std::size_t i = 0; i < t.requests.size(); ++i) {
        if (i > 0 && t.requests[i].issue_cycle < t.requests[i - 1].issue_cycle)
            throw Error(ErrorKind::InvalidConfig, "issue cycles decrease at request " + std::to_string(i));
        if (t.requests[i].address >= limit)
            throw Error(ErrorKind::AddressOverflow, "request " + std::to_string(i) + " address exceeds " +
                                                        std::to_string(address_bits) + "-bit range");
    }
}

namespace detail {
inline AccessKind draw_kind(SplitMix64& rng, double read_fraction)
{
    return rng.uniform() < read_fraction ? AccessKind::Read : AccessKind::Write;
}

inline void check_common(std::size_t n, double read_fraction)
{
    if (n < 1) throw Error(ErrorKind::InvalidConfig, "trace length must be >= 1");
    if (!(read_fraction >= 0.0 && read_fraction <= 1.0))
        throw Error(ErrorKind::InvalidConfig, "read_fraction must lie in [0,1]");
}
} // namespace detail

/// Streaming workload: address_i = start + i*stride, issue_i = i*interarrival.
/// Request kinds use one SplitMix64 draw per request (read iff u < read_fraction).
inline MemoryTrace gen_streaming(std::size_t n, std::uint64_t start_addr, std::uint64_t stride,
                                 std::uint64_t interarrival, double read_fraction, std::uint64_t seed,
                                 int address_bits = DramProfile{}.address_bits())
{
    detail::check_common(n, read_fraction);
    if (stride < 1) throw Error(ErrorKind::InvalidConfig, "stride must be >= 1");
    const std::uint64_t limit = std::uint64_t{1} << address_bits;
    const std::uint64_t steps = n - 1;
    if (start_addr >= limit || (steps > 0 && stride > (limit - 1 - start_addr) / steps))
        throw Error(ErrorKind::AddressOverflow, "last streaming address exceeds the decodable range");

    SplitMix64 rng(seed);
    MemoryTrace t;
    t.requests.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        t.requests.push_back({i * interarrival, detail::draw_kind(rng, read_fraction), start_addr + i * stride});
    return t;
}

/// Random workload: per request one draw for the kind, then one draw masked by
/// addr_mask for the address.
inline MemoryTrace gen_random(std::size_t n, std::uint64_t addr_mask, std::uint64_t interarrival, double read_fraction,
                              std::uint64_t seed)
{
    detail::check_common(n, read_fraction);
    SplitMix64 rng(seed);
    MemoryTrace t;
    t.requests.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto kind = detail::draw_kind(rng, read_fraction);
        t.requests.push_back({i * interarrival, kind, rng.next() & addr_mask});
    }
    return t;
}

/// Canonical line: "<cycle>: <read|write> 0x<16 lowercase hex digits>".
inline std::string serialize_trace(const MemoryTrace& t)
{
    std::string out;
    out.reserve(t.size() * 36);
    char buf[64];
    for (const auto& r : t.requests) {
        int len = std::snprintf(buf, sizeof buf, "%llu: %s 0x%016llx\n", static_cast<unsigned long long>(r.issue_cycle),
                                r.kind == AccessKind::Read ? "read" : "write",
                                static_cast<unsigned long long>(r.address));
        out.append(buf, static_cast<std::size_t>(len));
    }
    return out;
}

/// Blank lines and `#` comments are skipped.
inline MemoryTrace parse_trace(std::string_view text)
{
    MemoryTrace t;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    auto fail = [&line_no](const std::string& why) {
        throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + why);
    };
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        auto colon = line.find(':');
        if (colon == std::string_view::npos) fail("missing ':' after cycle");
        auto cyc_text = trim(line.substr(0, colon));
        Request r;
        auto [p1, e1] = std::from_chars(cyc_text.data(), cyc_text.data() + cyc_text.size(), r.issue_cycle);
        if (e1 != std::errc{} || p1 != cyc_text.data() + cyc_text.size() || cyc_text.empty()) fail("bad cycle");

        auto rest = trim(line.substr(colon + 1));
        auto sp = rest.find_first_of(" \t");
        if (sp == std::string_view::npos) fail("expected '<kind> <address>'");
        auto kind = rest.substr(0, sp);
        if (kind == "read")
            r.kind = AccessKind::Read;
        else if (kind == "write")
            r.kind = AccessKind::Write;
        else
            fail("unknown kind");

        auto addr = trim(rest.substr(sp));
        if (addr.size() < 3 || addr[0] != '0' || (addr[1] != 'x' && addr[1] != 'X')) fail("address must be 0x-prefixed hex");
        addr.remove_prefix(2);
        auto [p2, e2] = std::from_chars(addr.data(), addr.data() + addr.size(), r.address, 16);
        if (e2 != std::errc{} || p2 != addr.data() + addr.size()) fail("bad address");

        if (!t.requests.empty() && r.issue_cycle < t.requests.back().issue_cycle) fail("issue cycle decreases");
        t.requests.push_back(r);
    }
    return t;
}

inline MemoryTrace load_trace(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::IoError, "cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_trace(ss.str());
}

/// Parameters of one of the two generator families, as read from an
/// experiment config `[trace]` section or CLI flags.
struct TraceSpec {
    std::string kind = "random"; // streaming | random | file
    std::size_t n = 1000;
    std::uint64_t seed = 1;
    std::uint64_t start_addr = 0;
    std::uint64_t stride = 64;
    std::uint64_t addr_mask = 0x1FFFFFC0ULL;
    std::uint64_t interarrival = 8;
    double read_fraction = 0.7;
    std::string path;

    friend bool operator==(const TraceSpec&, const TraceSpec&) = default;
};

inline MemoryTrace make_trace(const TraceSpec& s, const DramProfile& profile = {})
{
    MemoryTrace t;
    if (s.kind == "streaming")
        t = gen_streaming(s.n, s.start_addr, s.stride, s.interarrival, s.read_fraction, s.seed, profile.address_bits());
    else if (s.kind == "random")
        t = gen_random(s.n, s.addr_mask, s.interarrival, s.read_fraction, s.seed);
    else if (s.kind == "file")
        t = load_trace(s.path);
    else
        throw Error(ErrorKind::ConfigError, "unknown trace kind '" + s.kind + "'");
    check_trace(t, profile.address_bits());
    return t;
}

} // namespace dramdse
