#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "volley/client/state.hpp"
#include "volley/core/classify.hpp"
#include "volley/core/model.hpp"
#include "volley/core/random.hpp"
#include "volley/server/dispatch.hpp"

namespace volley::sim {

using Json = nlohmann::ordered_json;

/// Scalar distribution. JSON forms: a number (constant), {"uniform": [lo, hi]},
/// {"lognormal": [median, sigma]}, {"exponential": mean}.
struct Distribution {
    enum class Kind : std::uint8_t { constant, uniform, lognormal, exponential };
    Kind kind = Kind::constant;
    double a = 0.0;
    double b = 0.0;

    static Distribution constant(double v) { return {Kind::constant, v, 0.0}; }
    static Distribution uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
    static Distribution lognormal(double median, double sigma) { return {Kind::lognormal, median, sigma}; }
    static Distribution exponential(double mean) { return {Kind::exponential, mean, 0.0}; }

    double sample(Rng& rng) const;
    double mean() const;
    double min() const;
    /// P(X <= x).
    double cdf(double x) const;
};

struct GpuSpec {
    ResourceKind kind = ResourceKind::nvidia_gpu;
    int count = 1;
    Distribution flops = Distribution::constant(1e10);
    Distribution efficiency = Distribution::constant(1.0);
};

/// A group of identically distributed hosts.
struct HostGroup {
    int count = 1;
    int cpus = 1;
    Distribution cpu_flops = Distribution::constant(1e9);
    Distribution efficiency = Distribution::constant(1.0);
    std::optional<GpuSpec> gpu;
    /// Exponential on/off periods; 0 means always on.
    double mean_on_seconds = 0.0;
    double mean_off_seconds = 0.0;
    /// Per-second hazard of permanent departure.
    double departure_rate = 0.0;
    double throttle_duty_cycle = 1.0;
    double ram_bytes = 4e9;
    double disk_bytes = 1e11;
    std::vector<std::string> os{"linux"};
    std::vector<std::string> vendor{"intel"};
    std::vector<std::string> model{"generic"};
    int driver_version = 0;
    double faulty_fraction = 0.0;
    double faulty_prob = 0.0;
    double malicious_fraction = 0.0;
    double malicious_prob = 0.0;
    double crash_prob = 0.0;
    std::map<std::string, KeywordPref> keyword_prefs;
};

struct VersionSpec {
    std::map<ResourceKind, double> resources{{ResourceKind::cpu, 1.0}};
    std::vector<std::string> os_allow;
    int min_driver_version = 0;
    /// Multiplies host efficiency when running this version.
    double efficiency = 1.0;
};

struct ProjectSpec {
    std::string name;
    double share = 100.0;
    std::vector<VersionSpec> versions{VersionSpec{}};
    double delay_bound_seconds = 0.0;
    Distribution est_flop_count = Distribution::constant(3.6e12);
    /// true_flop_count / est_flop_count.
    Distribution true_flop_ratio = Distribution::constant(1.0);
    /// Sigma of the lognormal multiplicative noise on each execution.
    double runtime_noise_sigma = 0.0;
    double est_wss_bytes = 1e8;
    double disk_bound_bytes = 1e8;
    int min_quorum = 1;
    int init_ninstances = 1;
    int max_error_instances = 3;
    int max_success_instances = 6;
    std::vector<std::string> keywords;
    std::vector<std::string> input_files;
    /// Jobs per batch; a batch arrives every batch_interval_seconds (0: once).
    int batch_size = 100;
    double batch_interval_seconds = 0.0;
    /// Cap on jobs submitted; 0 is unlimited.
    int total_jobs = 0;
    /// Keep at least this many active jobs; 0 disables.
    int backlog = 0;
};

struct ClientSpec {
    double buffer_lo_seconds = 0.1 * 86400;
    double buffer_hi_seconds = 0.5 * 86400;
    std::size_t report_batch = 8;
    double report_margin_fraction = 0.1;
    double rpc_latency_seconds = 1.0;
    double checkpoint_interval_seconds = 600.0;
};

struct PolicySpec {
    bool edf_enabled = true;
    bool adaptive_replication = false;
    int replication_threshold = 10;
    HrLevel hr_level = HrLevel::none;
    bool homogeneous_app_version = false;
    server::ScoreWeights score_weights;
    std::size_t cache_slots = 1000;
    double time_slice_seconds = 3600.0;
    bool count_timeouts_as_errors = false;
    double purge_grace_seconds = 3 * 86400.0;
    bool collusion = false;
    int size_classes = 1;
    double skip_bonus_age_seconds = 86400.0;
    /// Relative tolerance of fuzzy result comparison; 0 compares bitwise.
    double fuzzy_tolerance = 0.0;
};

struct Scenario {
    std::uint64_t seed = 1;
    double duration_seconds = 0.0;
    /// Jobs excluded from the replication overhead figure.
    int warmup_jobs = 0;
    std::vector<HostGroup> hosts;
    std::vector<ProjectSpec> projects;
    ClientSpec client;
    PolicySpec policy;

    int host_count() const;
    double max_delay_bound() const;
};

/// Parses and validates; throws ValidationError naming the key path.
Scenario parse_scenario(const Json& doc);
/// Every key, defaults included.
Json emit_scenario(const Scenario& scenario);
/// emit(parse(doc)).
Json canonicalize(const Json& doc);
/// Stable hash of the canonical form, as 16 hex digits.
std::string scenario_digest(const Json& doc);

/// Sets `path` (dotted keys with [i] indexes, e.g. projects[0].share) to
/// `value`, parsed as JSON when possible and as a string otherwise.
void apply_override(Json& doc, std::string_view path, std::string_view value);

/// Reads a scenario file; throws ValidationError on I/O or parse failure.
Json load_json(const std::string& path);

}  // namespace volley::sim
