#include "volley/sim/models.hpp"

#include <cmath>

namespace volley::sim {

double AvailabilityModel::long_run_availability() const {
    if (always_on()) return 1.0;
    return mean_on_seconds / (mean_on_seconds + mean_off_seconds);
}

std::optional<SimMs> AvailabilityModel::sample_departure(Rng& rng) const {
    if (departure_rate <= 0.0) return std::nullopt;
    return seconds_to_ms(rng.exponential(1.0 / departure_rate));
}

void AvailabilityAverage::observe(double seconds, bool on) {
    if (seconds <= 0.0) return;
    const double keep = std::exp2(-seconds / half_life_);
    value_ = value_ * keep + (on ? 1.0 - keep : 0.0);
}

validation::OutputDigest correct_digest(JobId job) {
    return {{static_cast<double>(mix64(job.value) >> 11) * 0x1.0p-53}};
}

Outcome sample_outcome(const Reliability& reliability, double crash_prob, JobId job, Rng& rng,
                       std::uint64_t& wrong_counter, bool collusion) {
    Outcome out;
    if (crash_prob > 0.0 && rng.bernoulli(crash_prob)) {
        out.kind = Outcome::Kind::crash;
        return out;
    }
    const bool wrong = reliability.kind != Reliability::Kind::honest && rng.bernoulli(reliability.probability);
    if (!wrong) {
        out.digest = correct_digest(job);
        return out;
    }
    out.kind = Outcome::Kind::wrong;
    // Correct digests lie in [0, 1); wrong ones are negative.
    if (collusion && reliability.kind == Reliability::Kind::malicious) {
        out.digest = {{-0.5}};
    } else {
        out.digest = {{-static_cast<double>(++wrong_counter)}};
    }
    return out;
}

}  // namespace volley::sim
