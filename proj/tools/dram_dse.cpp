// dram-dse: command-line front end.
//
// Exit codes: 0 success, 2 bad invocation / config / input, 3 failure while
// running.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "dramdse/analysis/oracle.hpp"
#include "dramdse/analysis/phik.hpp"
#include "dramdse/harness/compare.hpp"
#include "dramdse/harness/experiment.hpp"
#include "dramdse/harness/plot.hpp"

using namespace dramdse;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int exit_code_for(ErrorKind k)
{
    switch (k) {
    case ErrorKind::NonFinite:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::LengthMismatch:
    case ErrorKind::IncompleteAction:
    case ErrorKind::IoError: return kExitRuntime;
    default: return kExitConfig;
    }
}

// Input files that cannot be read are a problem with the invocation.
template <typename F>
auto load_input(F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::IoError) throw Error(ErrorKind::ConfigError, e.message());
        throw;
    }
}

void write_output(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-")
        std::cout << text;
    else
        csv::write_file_atomic(path, text);
}

struct TraceFlags {
    std::string file;
    std::string profile;
};

DramProfile load_profile_flag(const std::string& path)
{
    return path.empty() ? DramProfile{} : load_input([&] { return load_profile(path); });
}

// --pin name=value restricts one factor of the space to a single value.
ActionSpace build_space(const std::string& kind, const std::vector<std::string>& pins)
{
    ActionSpace s;
    if (kind == "full")
        s = ActionSpace::full();
    else if (kind == "categorical")
        s = ActionSpace::categorical_only();
    else
        throw Error(ErrorKind::ConfigError, "--space must be full or categorical");
    for (const auto& p : pins) {
        auto eq = p.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::ConfigError, "--pin expects name=value, got '" + p + "'");
        const auto name = p.substr(0, eq);
        int f = -1;
        for (int i = 0; i < kNumParams; ++i)
            if (kParamNames[static_cast<std::size_t>(i)] == name) f = i;
        if (f < 0) throw Error(ErrorKind::ConfigError, "--pin: unknown parameter '" + name + "'");
        auto v = parse_param_value(f, p.substr(eq + 1));
        if (!v) throw Error(ErrorKind::ConfigError, "--pin: bad value for " + name);
        s.restrict(f, {*v});
    }
    return s;
}

unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Design-space exploration of DRAM memory controller parameters with RL agents"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "dram-dse 0.1.0");

    // run
    auto* run = app.add_subcommand("run", "Run an experiment sweep from a config file");
    std::string config_path, output_dir;
    unsigned jobs = 1;
    std::vector<std::string> overrides;
    bool quiet = false;
    run->add_option("--config", config_path, "Experiment config")->required();
    run->add_option("--jobs", jobs, "Runs trained in parallel")->check(CLI::PositiveNumber);
    run->add_option("--set", overrides, "Override a config key: section.key=value");
    run->add_option("--output", output_dir, "Output directory (overrides experiment.output_dir)");
    run->add_flag("--quiet", quiet, "No progress output");

    // trace gen
    auto* trace = app.add_subcommand("trace", "Trace utilities");
    trace->require_subcommand(1);
    auto* gen = trace->add_subcommand("gen", "Generate a synthetic trace");
    TraceSpec ts;
    std::string trace_out, gen_profile;
    gen->add_option("--kind", ts.kind, "streaming | random")->check(CLI::IsMember({"streaming", "random"}));
    gen->add_option("--n", ts.n, "Number of requests");
    gen->add_option("--seed", ts.seed, "Generator seed");
    gen->add_option("--stride", ts.stride, "Streaming stride in bytes");
    gen->add_option("--start-addr", ts.start_addr, "Streaming start address");
    gen->add_option("--addr-mask", ts.addr_mask, "Random address mask");
    gen->add_option("--interarrival", ts.interarrival, "Cycles between requests");
    gen->add_option("--read-fraction", ts.read_fraction, "Fraction of reads");
    gen->add_option("--profile", gen_profile, "Device profile (address width)");
    gen->add_option("--out", trace_out, "Output file (default stdout)");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Grid search, correlation and oracle analyses");
    analyze->require_subcommand(1);
    TraceFlags tf;
    std::string space_kind = "full", an_out, samples_in, objective_name = "low_power";
    std::vector<std::string> pins;
    std::size_t grid_n = 2000;
    std::uint64_t grid_seed = 0;
    unsigned threads = default_threads();
    int n_bins = 5;
    harness::ObjectiveSpec os;

    auto* grid = analyze->add_subcommand("grid", "Random grid search; writes a sample table");
    grid->add_option("--trace", tf.file, "Trace file")->required();
    grid->add_option("--profile", tf.profile, "Device profile");
    grid->add_option("--n", grid_n, "Number of sampled configurations")->check(CLI::PositiveNumber);
    grid->add_option("--seed", grid_seed, "Sampling seed");
    grid->add_option("--space", space_kind, "full | categorical");
    grid->add_option("--pin", pins, "Fix a parameter: name=value");
    grid->add_option("--threads", threads, "Simulation threads")->check(CLI::PositiveNumber);
    grid->add_option("--out", an_out, "Output CSV (default stdout)");

    auto* phik = analyze->add_subcommand("phik", "Correlation matrix of a sample table");
    phik->add_option("--in", samples_in, "Sample table from 'analyze grid'")->required();
    phik->add_option("--bins", n_bins, "Quantile bins for numeric columns")->check(CLI::Range(2, 1000));
    phik->add_option("--threads", threads, "Threads")->check(CLI::PositiveNumber);
    phik->add_option("--out", an_out, "Output CSV (default stdout)");

    auto* oracle = analyze->add_subcommand("oracle", "Exhaustive search of a (restricted) space");
    oracle->add_option("--trace", tf.file, "Trace file")->required();
    oracle->add_option("--profile", tf.profile, "Device profile");
    oracle->add_option("--objective", objective_name, "low_power | low_latency | joint");
    oracle->add_option("--space", space_kind, "full | categorical");
    oracle->add_option("--pin", pins, "Fix a parameter: name=value");
    oracle->add_option("--power-target-fraction", os.power_target_fraction, "Power target as a fraction of the default config");
    oracle->add_option("--latency-target-fraction", os.latency_target_fraction, "Latency target as a fraction of the default config");
    oracle->add_option("--power-target-mw", os.power_target_mw, "Absolute power target");
    oracle->add_option("--latency-target-ns", os.latency_target_ns, "Absolute latency target");
    oracle->add_option("--reward-cap", os.reward_cap, "Reward cap");
    oracle->add_option("--threads", threads, "Simulation threads")->check(CLI::PositiveNumber);
    oracle->add_option("--out", an_out, "Full reward table CSV");

    // plot / compare
    auto* plot = app.add_subcommand("plot", "Render curves.csv as SVG");
    std::string curves_in, plot_out;
    plot->add_option("--in", curves_in, "curves.csv")->required();
    plot->add_option("--out", plot_out, "Output SVG (default stdout)");

    auto* compare = app.add_subcommand("compare", "Compare formulations' final returns");
    std::vector<std::string> compare_in;
    std::string compare_out;
    compare->add_option("--in", compare_in, "One or more curves.csv files")->required();
    compare->add_option("--out", compare_out, "Output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) {
            auto spec = load_input([&] { return harness::load_spec(config_path, overrides); });
            if (!output_dir.empty()) spec.output_dir = output_dir;
            harness::ProgressFn progress;
            if (!quiet)
                progress = [](const harness::Cell& c, std::size_t done, std::size_t total) {
                    std::fprintf(stderr, "[%zu/%zu] %s\n", done, total, c.key().c_str());
                };
            auto result = harness::run_experiment(spec, jobs, progress);
            std::cout << harness::summary_to_csv(result.summary);
        } else if (*gen) {
            auto profile = load_profile_flag(gen_profile);
            write_output(trace_out, serialize_trace(make_trace(ts, profile)));
        } else if (*grid) {
            auto profile = load_profile_flag(tf.profile);
            auto t = load_input([&] { return load_trace(tf.file); });
            check_trace(t, profile.address_bits());
            auto table = analysis::random_grid_search(build_space(space_kind, pins), grid_n, t, profile, grid_seed, threads);
            write_output(an_out, analysis::to_csv(table));
        } else if (*phik) {
            auto table = analysis::sample_table_from_csv(load_input([&] { return csv::read_file(samples_in); }));
            write_output(an_out, analysis::phik_to_csv(analysis::phik_matrix(table, n_bins, threads)));
        } else if (*oracle) {
            auto profile = load_profile_flag(tf.profile);
            auto t = load_input([&] { return load_trace(tf.file); });
            check_trace(t, profile.address_bits());
            auto space = build_space(space_kind, pins);
            auto obj = harness::make_objective(os, parse_objective_kind(objective_name),
                                               simulate(t, default_config(), profile));
            auto r = analysis::exhaustive_oracle(space, t, profile, obj, threads);
            if (!an_out.empty()) write_output(an_out, analysis::oracle_to_csv(space, r));
            std::cout << "configurations " << r.rewards.size() << "\n"
                      << "best_rank " << r.best_rank << "\n"
                      << "best_reward " << csv::num(r.best_reward) << "\n"
                      << "best_config " << to_string(r.best_config) << "\n";
        } else if (*plot) {
            auto rows = harness::curves_from_csv(load_input([&] { return csv::read_file(curves_in); }));
            write_output(plot_out, harness::plot_curves(rows));
        } else if (*compare) {
            std::vector<harness::CurveRow> rows;
            for (const auto& path : compare_in) {
                auto part = harness::curves_from_csv(load_input([&] { return csv::read_file(path); }));
                rows.insert(rows.end(), part.begin(), part.end());
            }
            write_output(compare_out, harness::comparison_to_csv(harness::compare_formulations(rows)));
        }
    } catch (const Error& e) {
        std::cerr << "dram-dse: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "dram-dse: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
