#pragma once

#include <stdexcept>
#include <string>

namespace volley {

/// Input rejected by a validity check. `path` names the offending field
/// (for example `projects[0].delay_bound_seconds`) when one is known.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string path, const std::string& what)
        : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Internal contract violation, e.g. dispatching an app version to a host it
/// is not compatible with.
class DispatchError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace volley
