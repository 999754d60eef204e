#include "volley/client/wrr.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "volley/client/policy.hpp"
#include "volley/client/state.hpp"

namespace volley::client {

const WrrResourceResult* WrrResult::resource(ResourceKind kind) const {
    for (const auto& r : resources) {
        if (r.kind == kind) {
            return &r;
        }
    }
    return nullptr;
}

bool WrrResult::misses(InstanceId id) const {
    return std::find(miss_set.begin(), miss_set.end(), id) != miss_set.end();
}

double wrr_project_key(double priority, double share_fraction,
                       std::span<const std::int64_t> used_milli_ms, std::span<const int> instances) {
    double used = 0.0;
    for (std::size_t r = 0; r < used_milli_ms.size(); ++r) {
        used += static_cast<double>(used_milli_ms[r]) * 1e-6 / static_cast<double>(instances[r]);
    }
    return priority - used / share_fraction;
}

WrrResult simulate_wrr(const WrrInput& input) {
    const std::size_t n_res = input.resources.size();
    const std::size_t n_proj = input.projects.size();
    const std::size_t n_jobs = input.jobs.size();

    std::vector<int> instances(n_res);
    std::vector<std::int64_t> capacity(n_res);
    for (std::size_t r = 0; r < n_res; ++r) {
        instances[r] = input.resources[r].instances;
        capacity[r] = static_cast<std::int64_t>(instances[r]) * kUsageScale;
    }
    auto resource_index = [&](ResourceKind kind) -> std::ptrdiff_t {
        for (std::size_t r = 0; r < n_res; ++r) {
            if (input.resources[r].kind == kind) return static_cast<std::ptrdiff_t>(r);
        }
        return -1;
    };
    auto project_index = [&](ProjectId id) -> std::ptrdiff_t {
        for (std::size_t p = 0; p < n_proj; ++p) {
            if (input.projects[p].id == id) return static_cast<std::ptrdiff_t>(p);
        }
        return -1;
    };

    std::vector<std::ptrdiff_t> job_res(n_jobs);
    std::vector<std::ptrdiff_t> job_proj(n_jobs);
    std::vector<SimMs> remaining(n_jobs);
    std::vector<bool> done(n_jobs, false);
    for (std::size_t j = 0; j < n_jobs; ++j) {
        job_res[j] = resource_index(input.jobs[j].resource);
        job_proj[j] = project_index(input.jobs[j].project);
        remaining[j] = std::max<SimMs>(input.jobs[j].remaining, 0);
    }

    std::vector<std::vector<std::int64_t>> used(n_proj, std::vector<std::int64_t>(n_res, 0));

    WrrResult result;
    result.resources.resize(n_res);
    std::vector<bool> onset_seen(n_res, false);
    for (std::size_t r = 0; r < n_res; ++r) {
        result.resources[r].kind = input.resources[r].kind;
        result.resources[r].instances = instances[r];
        result.resources[r].instance_busy_ms.assign(static_cast<std::size_t>(instances[r]), 0.0);
    }

    SimMs t = 0;
    // Zero-length jobs complete at time 0.
    for (std::size_t j = 0; j < n_jobs; ++j) {
        if (remaining[j] == 0) {
            done[j] = true;
            result.completion[input.jobs[j].id] = 0;
        }
    }

    std::vector<std::size_t> order(n_proj);
    std::vector<std::size_t> running;
    std::vector<std::int64_t> busy(n_res);
    bool first = true;
    while (t < input.horizon) {
        std::vector<double> keys(n_proj);
        for (std::size_t p = 0; p < n_proj; ++p) {
            keys[p] = wrr_project_key(input.projects[p].priority, input.projects[p].share_fraction,
                                      used[p], instances);
        }
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (keys[a] != keys[b]) return keys[a] > keys[b];
            return input.projects[a].id < input.projects[b].id;
        });

        running.clear();
        std::fill(busy.begin(), busy.end(), 0);
        for (std::size_t p : order) {
            for (std::size_t j = 0; j < n_jobs; ++j) {
                if (done[j] || job_proj[j] != static_cast<std::ptrdiff_t>(p) || job_res[j] < 0) {
                    continue;
                }
                const auto r = static_cast<std::size_t>(job_res[j]);
                if (busy[r] + input.jobs[j].usage_milli <= capacity[r]) {
                    busy[r] += input.jobs[j].usage_milli;
                    running.push_back(j);
                }
            }
        }
        if (first) {
            for (std::size_t r = 0; r < n_res; ++r) {
                result.resources[r].initial_busy_milli = busy[r];
            }
            first = false;
        }
        if (running.empty()) {
            break;
        }

        SimMs dt = std::numeric_limits<SimMs>::max();
        for (std::size_t j : running) {
            dt = std::min(dt, remaining[j]);
        }
        dt = std::min(dt, input.horizon - t);

        for (std::size_t r = 0; r < n_res; ++r) {
            auto& rr = result.resources[r];
            const std::int64_t idle = capacity[r] - busy[r];
            if (idle > 0 && !onset_seen[r]) {
                rr.idle_onset = t;
                onset_seen[r] = true;
            }
            const SimMs overlap = std::max<SimMs>(0, std::min(t + dt, input.buffer_hi) - t);
            rr.shortfall_milli_ms += idle * overlap;
            for (int k = 0; k < instances[r]; ++k) {
                const std::int64_t share = std::clamp<std::int64_t>(busy[r] - k * kUsageScale, 0, kUsageScale);
                rr.instance_busy_ms[static_cast<std::size_t>(k)] +=
                    static_cast<double>(share * dt) / kUsageScale;
            }
        }
        for (std::size_t j : running) {
            remaining[j] -= dt;
            used[static_cast<std::size_t>(job_proj[j])][static_cast<std::size_t>(job_res[j])] +=
                input.jobs[j].usage_milli * dt;
            if (remaining[j] == 0) {
                done[j] = true;
                result.completion[input.jobs[j].id] = t + dt;
            }
        }
        t += dt;
    }

    // Everything idle after the last completion.
    for (std::size_t r = 0; r < n_res; ++r) {
        auto& rr = result.resources[r];
        if (!onset_seen[r]) {
            rr.idle_onset = t;
        }
        if (t < input.buffer_hi) {
            rr.shortfall_milli_ms += capacity[r] * (input.buffer_hi - t);
        }
    }

    for (std::size_t j = 0; j < n_jobs; ++j) {
        const auto& job = input.jobs[j];
        auto it = result.completion.find(job.id);
        const bool miss = it == result.completion.end() ? job.deadline <= input.horizon
                                                        : it->second > job.deadline;
        if (miss) {
            result.miss_set.push_back(job.id);
        }
    }
    return result;
}

WrrResult wrr_simulate(const ClientState& state, SimMs now, SimMs horizon) {
    WrrInput input;
    input.buffer_hi = seconds_to_ms(state.host.prefs.buffer_hi_seconds);
    input.horizon = horizon;
    for (const auto& res : state.host.resources) {
        input.resources.push_back({res.kind, state.usable_instances(res.kind)});
    }
    for (const auto& p : state.projects) {
        if (!p.suspended) {
            input.projects.push_back({p.id, p.priority.balance, state.share_fraction(p.id)});
        }
    }
    std::vector<const ClientJob*> fifo;
    for (const auto& j : state.queue) {
        fifo.push_back(&j);
    }
    std::sort(fifo.begin(), fifo.end(), [](const ClientJob* a, const ClientJob* b) {
        return a->arrival_seq < b->arrival_seq;
    });
    for (const ClientJob* j : fifo) {
        const ResourceKind kind = j->primary_resource();
        WrrJob w;
        w.id = j->instance;
        w.project = j->project;
        w.resource = kind;
        w.usage_milli = std::llround(j->usage_of(kind) * kUsageScale);
        w.remaining = seconds_to_ms(estimate_remaining(*j, state.runtime_scale(kind)));
        w.deadline = j->deadline - now;
        input.jobs.push_back(w);
    }
    return simulate_wrr(input);
}

SimMs default_horizon(const ClientState& state, SimMs now) {
    SimMs horizon = seconds_to_ms(state.host.prefs.buffer_hi_seconds);
    for (const auto& j : state.queue) {
        horizon = std::max(horizon, j.deadline - now);
    }
    return horizon + 1;
}

}  // namespace volley::client
