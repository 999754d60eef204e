#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

namespace volley {

/// Integer identifier tagged with the entity it names, so a HostId cannot be
/// passed where a JobId is expected.
template <typename Tag>
struct StrongId {
    std::uint64_t value = 0;

    constexpr StrongId() = default;
    constexpr explicit StrongId(std::uint64_t v) : value(v) {}

    constexpr auto operator<=>(const StrongId&) const = default;
};

template <typename Tag>
std::ostream& operator<<(std::ostream& os, StrongId<Tag> id) {
    return os << id.value;
}

using HostId = StrongId<struct HostTag>;
using JobId = StrongId<struct JobTag>;
using AppId = StrongId<struct AppTag>;
using AppVersionId = StrongId<struct AppVersionTag>;
using ProjectId = StrongId<struct ProjectTag>;
using SubmitterId = StrongId<struct SubmitterTag>;

/// A job instance is named by its job and a per-job sequence number; the
/// sequence orders instances of one job by creation.
struct InstanceId {
    JobId job;
    std::uint32_t seq = 0;

    constexpr auto operator<=>(const InstanceId&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, InstanceId id) {
    return os << id.job.value << '.' << id.seq;
}

}  // namespace volley

template <typename Tag>
struct std::hash<volley::StrongId<Tag>> {
    std::size_t operator()(volley::StrongId<Tag> id) const noexcept {
        return std::hash<std::uint64_t>{}(id.value);
    }
};

template <>
struct std::hash<volley::InstanceId> {
    std::size_t operator()(volley::InstanceId id) const noexcept {
        return std::hash<std::uint64_t>{}(id.job.value * 1000003ULL + id.seq);
    }
};
