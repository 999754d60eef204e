#pragma once

namespace volley::client {

/// CPU throttling: computation is suspended and resumed in a fixed on/off
/// pattern whose on-fraction is the duty cycle. Each cycle runs for
/// `granularity` seconds, then stays off for granularity * (1/duty - 1).
class Throttle {
public:
    explicit Throttle(double duty_cycle, double granularity_seconds = 1.0);

    double duty_cycle() const { return duty_; }
    bool running_at(double t) const;
    /// Seconds of computation within [t0, t1).
    double compute_time(double t0, double t1) const;

private:
    /// Compute time in [0, t).
    double compute_before(double t) const;

    double duty_;
    double on_;
    double period_;
};

}  // namespace volley::client
