#pragma once

#include <cstdint>
#include <optional>

#include "volley/core/ids.hpp"
#include "volley/core/model.hpp"
#include "volley/core/random.hpp"
#include "volley/core/time.hpp"
#include "volley/validation/validation.hpp"

namespace volley::sim {

/// Two-state exponential on/off process with a departure hazard.
struct AvailabilityModel {
    /// 0 means always on.
    double mean_on_seconds = 0.0;
    double mean_off_seconds = 0.0;
    double departure_rate = 0.0;

    bool always_on() const { return mean_on_seconds <= 0.0; }
    /// on / (on + off); 1 when always on.
    double long_run_availability() const;
    SimMs sample_on(Rng& rng) const { return seconds_to_ms(rng.exponential(mean_on_seconds)); }
    SimMs sample_off(Rng& rng) const { return seconds_to_ms(rng.exponential(mean_off_seconds)); }
    /// Time until permanent departure; nullopt with a zero hazard.
    std::optional<SimMs> sample_departure(Rng& rng) const;
};

/// Exponentially weighted fraction of time a host was on.
class AvailabilityAverage {
public:
    explicit AvailabilityAverage(double half_life_seconds = 10 * 86400.0, double initial = 1.0)
        : half_life_(half_life_seconds), value_(initial) {}

    /// Accounts for `seconds` spent in state `on`.
    void observe(double seconds, bool on);
    double value() const { return value_; }

private:
    double half_life_;
    double value_;
};

/// Result an honest host computes for a job.
validation::OutputDigest correct_digest(JobId job);

struct Outcome {
    enum class Kind : std::uint8_t { correct, wrong, crash };
    Kind kind = Kind::correct;
    validation::OutputDigest digest;
};

/// Samples the result of a finished execution. Wrong digests are unique per
/// draw (drawn from `wrong_counter`) except for malicious hosts under
/// collusion, which all return the same wrong value.
Outcome sample_outcome(const Reliability& reliability, double crash_prob, JobId job, Rng& rng,
                       std::uint64_t& wrong_counter, bool collusion = false);

}  // namespace volley::sim
