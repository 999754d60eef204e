#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "volley/core/model.hpp"

namespace volley {

/// Homogeneous-redundancy equivalence relation.
enum class HrLevel : std::uint8_t { none, coarse, fine };

std::string_view to_string(HrLevel level);
std::optional<HrLevel> parse_hr_level(std::string_view name);

using HrClass = std::uint64_t;

/// Numerical-equivalence class of a host. `none` puts every host in one
/// class; `coarse` keys on OS and CPU vendor; `fine` adds the CPU model.
HrClass hr_class(const Host& host, HrLevel level);

/// Peak FLOPS of `version` on `host`: sum over used resources of usage times
/// the per-instance peak. Throws DispatchError if the version is not
/// compatible with the host.
double peak_flops_of(const AppVersion& version, const Host& host);

/// 64-bit FNV-1a. Stable across runs and platforms.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace volley
