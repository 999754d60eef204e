#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "volley/client/wrr.hpp"

namespace volley::oracle {

struct TimelineJob {
    std::size_t project = 0;
    std::size_t resource = 0;
    std::int64_t usage_milli = 1000;
    std::int64_t minutes = 1;
};

struct TimelineProject {
    std::uint64_t id = 0;
    double priority = 0.0;
    double share_fraction = 1.0;
};

struct Timeline {
    std::vector<int> instances;
    std::vector<TimelineProject> projects;
    /// FIFO order within a project is vector order.
    std::vector<TimelineJob> jobs;
    std::int64_t buffer_hi_minutes = 0;
};

/// Steps weighted round robin one minute at a time and integrates idle
/// capacity over [0, buffer_hi). The run set is rebuilt at time 0 and after
/// each minute in which some job finished. Returns the shortfall of each
/// resource in instance-milli x ms.
inline std::vector<std::int64_t> timeline_shortfall(const Timeline& tl) {
    constexpr std::int64_t kMinuteMs = 60000;
    const std::size_t n_res = tl.instances.size();
    const std::size_t n_proj = tl.projects.size();
    std::vector<std::int64_t> left(tl.jobs.size());
    for (std::size_t j = 0; j < tl.jobs.size(); ++j) left[j] = tl.jobs[j].minutes;
    std::vector<std::vector<std::int64_t>> used(n_proj, std::vector<std::int64_t>(n_res, 0));
    std::vector<std::int64_t> shortfall(n_res, 0);
    std::vector<bool> running(tl.jobs.size(), false);
    bool rebuild = true;

    for (std::int64_t minute = 0; minute < tl.buffer_hi_minutes; ++minute) {
        if (rebuild) {
            std::vector<std::size_t> order(n_proj);
            std::iota(order.begin(), order.end(), 0);
            std::vector<double> key(n_proj);
            for (std::size_t p = 0; p < n_proj; ++p) {
                key[p] = client::wrr_project_key(tl.projects[p].priority, tl.projects[p].share_fraction,
                                                 used[p], tl.instances);
            }
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return key[a] != key[b] ? key[a] > key[b] : tl.projects[a].id < tl.projects[b].id;
            });
            std::vector<std::int64_t> busy(n_res, 0);
            std::fill(running.begin(), running.end(), false);
            for (std::size_t p : order) {
                for (std::size_t j = 0; j < tl.jobs.size(); ++j) {
                    const auto& job = tl.jobs[j];
                    if (job.project != p || left[j] == 0) continue;
                    if (busy[job.resource] + job.usage_milli <= tl.instances[job.resource] * client::kUsageScale) {
                        busy[job.resource] += job.usage_milli;
                        running[j] = true;
                    }
                }
            }
            rebuild = false;
        }
        std::vector<std::int64_t> busy(n_res, 0);
        for (std::size_t j = 0; j < tl.jobs.size(); ++j) {
            if (!running[j]) continue;
            const auto& job = tl.jobs[j];
            busy[job.resource] += job.usage_milli;
            used[job.project][job.resource] += job.usage_milli * kMinuteMs;
            if (--left[j] == 0) {
                running[j] = false;
                rebuild = true;
            }
        }
        for (std::size_t r = 0; r < n_res; ++r) {
            shortfall[r] += (tl.instances[r] * client::kUsageScale - busy[r]) * kMinuteMs;
        }
    }
    return shortfall;
}

}  // namespace volley::oracle
