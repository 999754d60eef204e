#include "volley/core/model.hpp"

#include <algorithm>
#include <array>

#include "volley/core/error.hpp"

namespace volley {

namespace {

constexpr std::array<std::pair<ResourceKind, std::string_view>, 4> kResourceNames{{
    {ResourceKind::cpu, "cpu"},
    {ResourceKind::nvidia_gpu, "nvidia"},
    {ResourceKind::amd_gpu, "amd"},
    {ResourceKind::intel_gpu, "intel"},
}};

}  // namespace

std::string_view to_string(ResourceKind kind) {
    for (const auto& [k, name] : kResourceNames) {
        if (k == kind) {
            return name;
        }
    }
    return "unknown";
}

std::optional<ResourceKind> parse_resource_kind(std::string_view name) {
    for (const auto& [k, n] : kResourceNames) {
        if (n == name) {
            return k;
        }
    }
    return std::nullopt;
}

const ProcessingResource& Host::cpu() const {
    const auto* r = resource(ResourceKind::cpu);
    if (r == nullptr) {
        throw DispatchError("host " + std::to_string(id.value) + " has no CPU resource");
    }
    return *r;
}

const ProcessingResource* Host::resource(ResourceKind kind) const {
    auto it = std::find_if(resources.begin(), resources.end(),
                           [kind](const ProcessingResource& r) { return r.kind == kind; });
    return it == resources.end() ? nullptr : &*it;
}

void validate(const Host& host) {
    int cpus = 0;
    for (std::size_t i = 0; i < host.resources.size(); ++i) {
        const auto& r = host.resources[i];
        const std::string path = "resources[" + std::to_string(i) + "]";
        if (r.instance_count < 1) {
            throw ValidationError(path + ".instance_count", "must be >= 1");
        }
        if (!(r.peak_flops_per_instance > 0.0)) {
            throw ValidationError(path + ".peak_flops_per_instance", "must be > 0");
        }
        if (!(r.availability_fraction >= 0.0 && r.availability_fraction <= 1.0)) {
            throw ValidationError(path + ".availability_fraction", "must be in [0,1]");
        }
        cpus += r.kind == ResourceKind::cpu ? 1 : 0;
    }
    if (cpus != 1) {
        throw ValidationError("resources", "host must have exactly one CPU resource");
    }
    if (!(host.ram_bytes > 0.0)) {
        throw ValidationError("ram_bytes", "must be > 0");
    }
    const auto& p = host.prefs;
    if (p.n_usable_cpus < 1 || p.n_usable_cpus > host.cpu().instance_count) {
        throw ValidationError("prefs.n_usable_cpus", "must be in [1, cpu instance_count]");
    }
    if (!(p.throttle_duty_cycle > 0.0 && p.throttle_duty_cycle <= 1.0)) {
        throw ValidationError("prefs.throttle_duty_cycle", "must be in (0,1]");
    }
    if (!(p.buffer_lo_seconds > 0.0 && p.buffer_lo_seconds <= p.buffer_hi_seconds)) {
        throw ValidationError("prefs.buffer_lo_seconds", "need 0 < buffer_lo <= buffer_hi");
    }
    if (!(p.max_ram_fraction > 0.0 && p.max_ram_fraction <= 1.0)) {
        throw ValidationError("prefs.max_ram_fraction", "must be in (0,1]");
    }
}

double AppVersion::usage(ResourceKind kind) const {
    for (const auto& u : resource_usage) {
        if (u.kind == kind) {
            return u.amount;
        }
    }
    return 0.0;
}

ResourceKind AppVersion::primary_resource() const {
    for (const auto& u : resource_usage) {
        if (is_gpu(u.kind)) {
            return u.kind;
        }
    }
    return ResourceKind::cpu;
}

void validate(const AppVersion& version) {
    if (version.resource_usage.empty()) {
        throw ValidationError("resource_usage", "app version must use at least one resource");
    }
    std::set<ResourceKind> seen;
    for (const auto& u : version.resource_usage) {
        if (!(u.amount > 0.0)) {
            throw ValidationError("resource_usage." + std::string(to_string(u.kind)),
                                  "usage must be > 0");
        }
        if (!seen.insert(u.kind).second) {
            throw ValidationError("resource_usage." + std::string(to_string(u.kind)),
                                  "duplicate resource kind");
        }
    }
}

bool compatible(const AppVersion& version, const Host& host) {
    const auto& allow = version.compatibility.os_allow;
    if (!allow.empty() && std::find(allow.begin(), allow.end(), host.os_tag) == allow.end()) {
        return false;
    }
    for (const auto& u : version.resource_usage) {
        if (host.resource(u.kind) == nullptr) {
            return false;
        }
    }
    const bool needs_driver = std::any_of(version.resource_usage.begin(),
                                          version.resource_usage.end(),
                                          [](const ResourceUsage& u) { return is_gpu(u.kind); });
    return !needs_driver || host.driver_version >= version.compatibility.min_driver_version;
}

void validate(const JobSpec& spec) {
    if (spec.min_quorum < 1) {
        throw ValidationError("min_quorum", "must be >= 1");
    }
    if (spec.init_ninstances < spec.min_quorum) {
        throw ValidationError("init_ninstances", "must be >= min_quorum");
    }
    if (!(spec.est_flop_count > 0.0)) {
        throw ValidationError("est_flop_count", "must be > 0");
    }
    if (spec.max_flop_count < spec.est_flop_count) {
        throw ValidationError("max_flop_count", "must be >= est_flop_count");
    }
    if (!(spec.delay_bound_seconds > 0.0)) {
        throw ValidationError("delay_bound_seconds", "must be > 0");
    }
    if (spec.max_error_instances < 0 || spec.max_success_instances < spec.min_quorum) {
        throw ValidationError("max_success_instances", "must be >= min_quorum");
    }
}

}  // namespace volley
