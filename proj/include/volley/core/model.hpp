#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "volley/core/ids.hpp"

namespace volley {

enum class ResourceKind : std::uint8_t { cpu, nvidia_gpu, amd_gpu, intel_gpu };

inline constexpr bool is_gpu(ResourceKind kind) { return kind != ResourceKind::cpu; }

std::string_view to_string(ResourceKind kind);
std::optional<ResourceKind> parse_resource_kind(std::string_view name);

/// One kind of processing resource on a host (all CPU cores, or all GPUs of
/// one vendor).
struct ProcessingResource {
    ResourceKind kind = ResourceKind::cpu;
    int instance_count = 1;
    double peak_flops_per_instance = 1e9;
    /// Fraction of time the resource is available for computing.
    double availability_fraction = 1.0;
};

/// Volunteer computing preferences.
struct ComputingPrefs {
    int n_usable_cpus = 1;
    /// Fraction of time computation runs when throttled (1 = unthrottled).
    double throttle_duty_cycle = 1.0;
    /// Lower and upper bounds on buffered work, in scaled-runtime seconds.
    double buffer_lo_seconds = 0.1 * 86400;
    double buffer_hi_seconds = 0.5 * 86400;
    double max_ram_fraction = 0.9;
};

enum class KeywordPref : std::uint8_t { neutral, yes, no };

struct Reliability {
    enum class Kind : std::uint8_t { honest, faulty, malicious };
    Kind kind = Kind::honest;
    /// Probability of a wrong result (error_prob for faulty hosts,
    /// wrong_result_prob for malicious ones). Ignored for honest hosts.
    double probability = 0.0;
};

struct Host {
    HostId id;
    std::vector<ProcessingResource> resources;
    std::string os_tag;
    std::string cpu_vendor_tag;
    std::string cpu_model_tag;
    /// Graphics driver version, consulted by app-version compatibility.
    int driver_version = 0;
    double ram_bytes = 4e9;
    double free_disk_bytes = 1e11;
    std::map<std::string, KeywordPref> keyword_prefs;
    std::set<std::string> sticky_files;
    Reliability reliability;
    ComputingPrefs prefs;

    const ProcessingResource& cpu() const;
    /// nullptr when the host has no resource of this kind.
    const ProcessingResource* resource(ResourceKind kind) const;
};

/// Throws ValidationError when a Host invariant does not hold.
void validate(const Host& host);

struct ResourceUsage {
    ResourceKind kind = ResourceKind::cpu;
    /// Instances used while running; may be fractional.
    double amount = 1.0;
};

/// Declarative stand-in for platform and plan-class matching.
struct Compatibility {
    /// Hosts whose os_tag is listed; empty means any OS.
    std::vector<std::string> os_allow;
    int min_driver_version = 0;
};

struct AppVersion {
    AppVersionId id;
    AppId app_id;
    int version_number = 1;
    std::vector<ResourceUsage> resource_usage;
    Compatibility compatibility;

    /// Usage of `kind`, 0 if unused.
    double usage(ResourceKind kind) const;
    bool uses(ResourceKind kind) const { return usage(kind) > 0.0; }
    /// The GPU kind when the version uses one, else CPU.
    ResourceKind primary_resource() const;
};

void validate(const AppVersion& version);

/// OS allow-list, presence of every used resource, and driver version.
bool compatible(const AppVersion& version, const Host& host);

/// Submitter-supplied job parameters. Ground-truth execution cost is kept by
/// the simulator, outside this type, so scheduling code cannot read it.
struct JobSpec {
    AppId app_id;
    double est_flop_count = 1e12;
    double max_flop_count = 1e13;
    double est_wss_bytes = 1e8;
    double disk_bound_bytes = 1e8;
    double delay_bound_seconds = 7 * 86400.0;
    int min_quorum = 1;
    int init_ninstances = 1;
    int max_error_instances = 3;
    int max_success_instances = 6;
    std::set<std::string> keywords;
    std::set<std::string> input_files;
    int size_class = 0;
    SubmitterId submitter_id;
};

void validate(const JobSpec& spec);

}  // namespace volley
