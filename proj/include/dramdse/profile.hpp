#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dramdse/error.hpp"
#include "dramdse/kvfile.hpp"

namespace dramdse {

/// Device timing and energy constants. Defaults are DDR3-1600-like; timings
/// are in controller cycles.
struct DramProfile {
    double clock_period_ns = 1.25;
    int num_banks = 8;
    int row_bits = 16;
    int bank_bits = 3;
    int col_bits = 10;
    int t_rcd = 11;
    int t_rp = 11;
    int t_cl = 11;
    int t_ras = 28;
    int t_rfc = 208;
    int t_refi = 6240;
    int t_burst = 4;
    double e_act_pre_nj = 3.0;
    double e_rd_nj = 1.2;
    double e_wr_nj = 1.3;
    double e_ref_nj = 45.0;
    double p_background_mw = 120.0;

    int address_bits() const { return row_bits + bank_bits + col_bits; }

    std::uint64_t address_limit() const { return std::uint64_t{1} << address_bits(); }

    friend bool operator==(const DramProfile&, const DramProfile&) = default;
};

inline std::vector<std::string> validate_profile(const DramProfile& p)
{
    std::vector<std::string> out;
    auto need = [&out](bool ok, const char* msg) {
        if (!ok) out.emplace_back(msg);
    };
    need(std::isfinite(p.clock_period_ns) && p.clock_period_ns > 0, "clock_period_ns must be > 0");
    need(p.num_banks >= 1, "num_banks must be >= 1");
    need(p.bank_bits >= 0 && (1 << p.bank_bits) == p.num_banks, "num_banks must equal 2^bank_bits");
    need(p.row_bits >= 1 && p.col_bits >= 0 && p.address_bits() <= 63, "address field widths out of range");
    need(p.t_rcd >= 1 && p.t_rp >= 1 && p.t_cl >= 1 && p.t_ras >= 1 && p.t_rfc >= 1 && p.t_refi >= 1 &&
             p.t_burst >= 1,
         "all timings must be >= 1 cycle");
    need(p.t_ras >= p.t_rcd, "t_ras must be >= t_rcd");
    need(p.t_refi > p.t_rfc, "t_refi must be > t_rfc");
    need(p.e_act_pre_nj > 0 && p.e_rd_nj > 0 && p.e_wr_nj > 0 && p.e_ref_nj > 0 && p.p_background_mw > 0,
         "energies and background power must be > 0");
    return out;
}

inline void require_valid(const DramProfile& p)
{
    auto v = validate_profile(p);
    if (v.empty()) return;
    std::string msg;
    for (const auto& s : v) msg += (msg.empty() ? "" : "; ") + s;
    throw Error(ErrorKind::InvalidConfig, "profile: " + msg);
}

/// Reads profile fields from `kv`, keys optionally prefixed with `prefix`.
/// Missing keys keep their defaults; unknown keys under the prefix are errors.
inline DramProfile profile_from_kv(const KvFile& kv, const std::string& prefix = "")
{
    DramProfile p;
    auto d = [&](const char* k, double& field) { field = kv.get_double(prefix + k, field); };
    auto i = [&](const char* k, int& field) { field = static_cast<int>(kv.get_int(prefix + k, field)); };
    d("clock_period_ns", p.clock_period_ns);
    i("num_banks", p.num_banks);
    i("row_bits", p.row_bits);
    i("bank_bits", p.bank_bits);
    i("col_bits", p.col_bits);
    i("t_rcd", p.t_rcd);
    i("t_rp", p.t_rp);
    i("t_cl", p.t_cl);
    i("t_ras", p.t_ras);
    i("t_rfc", p.t_rfc);
    i("t_refi", p.t_refi);
    i("t_burst", p.t_burst);
    d("e_act_pre_nj", p.e_act_pre_nj);
    d("e_rd_nj", p.e_rd_nj);
    d("e_wr_nj", p.e_wr_nj);
    d("e_ref_nj", p.e_ref_nj);
    d("p_background_mw", p.p_background_mw);

    static const char* known[] = {"clock_period_ns", "num_banks", "row_bits", "bank_bits", "col_bits", "t_rcd",
                                  "t_rp", "t_cl", "t_ras", "t_rfc", "t_refi", "t_burst", "e_act_pre_nj",
                                  "e_rd_nj", "e_wr_nj", "e_ref_nj", "p_background_mw"};
    for (const auto& key : kv.keys()) {
        if (key.rfind(prefix, 0) != 0) continue;
        auto bare = key.substr(prefix.size());
        if (bare.find('.') != std::string::npos) continue;
        bool ok = false;
        for (const char* k : known) ok = ok || bare == k;
        if (!ok) throw Error(ErrorKind::ConfigError, "unknown profile key " + key);
    }
    require_valid(p);
    return p;
}

inline DramProfile load_profile(const std::string& path) { return profile_from_kv(KvFile::load(path)); }

} // namespace dramdse
