#include "volley/core/classify.hpp"

#include "volley/core/error.hpp"

namespace volley {

std::string_view to_string(HrLevel level) {
    switch (level) {
        case HrLevel::none: return "none";
        case HrLevel::coarse: return "coarse";
        case HrLevel::fine: return "fine";
    }
    return "none";
}

std::optional<HrLevel> parse_hr_level(std::string_view name) {
    if (name == "none") return HrLevel::none;
    if (name == "coarse") return HrLevel::coarse;
    if (name == "fine") return HrLevel::fine;
    return std::nullopt;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

HrClass hr_class(const Host& host, HrLevel level) {
    // Tags are NUL-separated, so ("ab","c") and ("a","bc") differ.
    std::string key;
    switch (level) {
        case HrLevel::none:
            return 0;
        case HrLevel::fine:
            key = host.cpu_model_tag;
            [[fallthrough]];
        case HrLevel::coarse:
            key = host.os_tag + '\0' + host.cpu_vendor_tag + '\0' + key;
            break;
    }
    // Reserve 0 for the universal class.
    const auto h = fnv1a(key);
    return h == 0 ? 1 : h;
}

double peak_flops_of(const AppVersion& version, const Host& host) {
    if (version.resource_usage.empty()) {
        throw DispatchError("app version " + std::to_string(version.id.value) + " uses no resources");
    }
    if (!compatible(version, host)) {
        throw DispatchError("app version " + std::to_string(version.id.value) +
                            " is not compatible with host " + std::to_string(host.id.value));
    }
    double total = 0.0;
    for (const auto& u : version.resource_usage) {
        total += u.amount * host.resource(u.kind)->peak_flops_per_instance;
    }
    return total;
}

}  // namespace volley
