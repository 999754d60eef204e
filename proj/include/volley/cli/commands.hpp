#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "volley/sim/engine.hpp"
#include "volley/sim/scenario.hpp"

namespace volley::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

struct RunOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> trace_path;
    std::string out_dir = ".";
    /// `key=value` pairs applied to the config before validation.
    std::vector<std::string> overrides;
};

/// Scenario digest, seed, metrics, policy echo and wall-clock time of a run.
struct RunReport {
    std::string scenario_digest;
    std::uint64_t seed = 0;
    sim::Metrics metrics;
    sim::Json policy;
    double wall_seconds = 0.0;

    sim::Json to_json() const;
    static RunReport from_json(const sim::Json& doc, const std::string& source);
};

/// Loads the config, applies overrides and the seed, and validates it.
sim::Json load_config(const RunOptions& options);

/// Runs a scenario and writes metrics.txt and report.json to out_dir, plus
/// the trace when requested. Returns an exit code; diagnostics go to `err`.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

struct BenchOptions {
    int hosts = 1000;
    int jobs = 100000;
    double seconds = 5.0;
    std::uint64_t seed = 1;
    std::size_t cache_slots = 1000;
};

struct BenchResult {
    std::int64_t dispatches = 0;
    std::int64_t requests = 0;
    double wall_seconds = 0.0;
    double rate = 0.0;
    /// Hash of the (host, instance) dispatch sequence.
    std::uint64_t sequence_digest = 0;
};

/// Drives the dispatcher in a tight loop against a pre-filled store until
/// the backlog is exhausted or `seconds` of wall time pass.
BenchResult bench_dispatch(const BenchOptions& options);
int cmd_bench_dispatch(const BenchOptions& options, std::ostream& out, std::ostream& err);

struct MetricDelta {
    std::string key;
    double a = 0.0;
    double b = 0.0;
    double delta = 0.0;
    /// delta / |a|; NaN when a is 0 and b is not.
    double relative = 0.0;
};

std::vector<MetricDelta> compare_reports(const RunReport& a, const RunReport& b);
int cmd_compare(const std::string& path_a, const std::string& path_b, std::ostream& out, std::ostream& err);

/// Sets the log level from VOLLEY_LOG (trace, debug, info, warn, error, off).
void configure_logging();

}  // namespace volley::cli
