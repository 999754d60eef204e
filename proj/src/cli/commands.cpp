#include "volley/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "volley/core/classify.hpp"
#include "volley/core/error.hpp"
#include "volley/server/project.hpp"

namespace volley::cli {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

void configure_logging() {
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("VOLLEY_LOG")) {
        spdlog::set_level(spdlog::level::from_str(env));
    }
}

sim::Json RunReport::to_json() const {
    sim::Json m = sim::Json::object();
    for (const auto& [k, v] : metrics.values) m[k] = v;
    return sim::Json{{"scenario_digest", scenario_digest},
                     {"seed", seed},
                     {"metrics", m},
                     {"policy", policy},
                     {"wall_seconds", wall_seconds}};
}

RunReport RunReport::from_json(const sim::Json& doc, const std::string& source) {
    RunReport r;
    try {
        r.scenario_digest = doc.at("scenario_digest").get<std::string>();
        r.seed = doc.at("seed").get<std::uint64_t>();
        for (const auto& [k, v] : doc.at("metrics").items()) {
            r.metrics.values[k] = v.is_number() ? v.get<double>() : std::numeric_limits<double>::quiet_NaN();
        }
        r.policy = doc.value("policy", sim::Json::object());
        r.wall_seconds = doc.value("wall_seconds", 0.0);
    } catch (const sim::Json::exception& e) {
        throw ValidationError(source, std::string("not a run report: ") + e.what());
    }
    return r;
}

sim::Json load_config(const RunOptions& options) {
    sim::Json doc = sim::load_json(options.config_path);
    for (const auto& kv : options.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ValidationError(kv, "override must be key=value");
        sim::apply_override(doc, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (options.seed) doc["seed"] = *options.seed;
    return sim::canonicalize(doc);
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
    try {
        const sim::Json doc = load_config(options);
        const sim::Scenario scenario = sim::parse_scenario(doc);

        std::ofstream trace_file;
        std::optional<StreamTrace> trace;
        if (options.trace_path) {
            trace_file.open(*options.trace_path);
            if (!trace_file) throw ValidationError(*options.trace_path, "cannot write trace file");
            trace.emplace(trace_file);
        }
        const auto start = Clock::now();
        const sim::RunResult result = sim::run(scenario, trace ? &*trace : nullptr);
        const double wall = std::chrono::duration<double>(Clock::now() - start).count();

        RunReport report;
        report.scenario_digest = sim::scenario_digest(doc);
        report.seed = scenario.seed;
        report.metrics = result.metrics;
        report.policy = doc.at("policy");
        report.wall_seconds = wall;

        std::error_code ec;
        fs::create_directories(options.out_dir, ec);
        const fs::path dir(options.out_dir);
        std::ofstream metrics_file(dir / "metrics.txt");
        std::ofstream report_file(dir / "report.json");
        if (!metrics_file || !report_file) throw ValidationError(options.out_dir, "cannot write output files");
        metrics_file << result.metrics.text();
        report_file << report.to_json().dump(2) << '\n';
        out << fmt::format("scenario {} seed {}: {} events in {:.2f} s\n", report.scenario_digest,
                           report.seed, result.events, wall);
        out << result.metrics.text();
        return kExitOk;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

BenchResult bench_dispatch(const BenchOptions& o) {
    Rng rng(o.seed);
    server::ServerConfig cfg;
    cfg.cache_slots = o.cache_slots;
    server::ProjectServer srv(ProjectId(1), cfg, Rng::stream(o.seed, 3, 0));
    AppVersion version;
    version.id = AppVersionId(1);
    version.app_id = AppId(1);
    version.resource_usage = {{ResourceKind::cpu, 1.0}};
    srv.catalog().add(version);

    JobSpec spec;
    spec.app_id = AppId(1);
    spec.est_flop_count = 3.6e12;
    spec.delay_bound_seconds = 7 * 86400.0;
    for (int i = 0; i < o.jobs; ++i) srv.submit(JobId(static_cast<std::uint64_t>(i) + 1), spec, 0);

    std::vector<server::SchedulerRequest> requests;
    for (int i = 0; i < o.hosts; ++i) {
        server::SchedulerRequest r;
        r.host.id = HostId(static_cast<std::uint64_t>(i) + 1);
        const int cpus = 1 + static_cast<int>(rng.below(8));
        r.host.resources = {{ResourceKind::cpu, cpus, rng.uniform(1e9, 4e9), 1.0}};
        r.host.prefs.n_usable_cpus = cpus;
        r.work.resources[ResourceKind::cpu] = {4 * 3600.0, 0.0, 0.0};
        requests.push_back(r);
    }

    BenchResult result;
    std::uint64_t digest = 0xcbf29ce484222325ULL;
    const auto start = Clock::now();
    const auto limit = std::chrono::duration<double>(o.seconds);
    SimMs now = 0;
    std::size_t next_host = 0;
    while (!requests.empty() && Clock::now() - start < limit) {
        srv.feeder_tick();
        if (srv.cache().occupied() == 0) break;
        const auto& req = requests[next_host];
        next_host = (next_host + 1) % requests.size();
        const auto reply = srv.handle_request(req, now);
        now += 10;
        ++result.requests;
        for (const auto& j : reply.jobs) {
            digest = fnv1a(fmt::format("{}:{}.{};", req.host.id.value, j.instance.job.value, j.instance.seq), digest);
            ++result.dispatches;
        }
    }
    result.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    result.rate = result.wall_seconds > 0.0 ? static_cast<double>(result.dispatches) / result.wall_seconds : 0.0;
    result.sequence_digest = digest;
    return result;
}

int cmd_bench_dispatch(const BenchOptions& options, std::ostream& out, std::ostream& err) {
    try {
        if (options.hosts < 1) throw ValidationError("--hosts", "must be at least 1");
        if (options.jobs < 0) throw ValidationError("--jobs", "must be >= 0");
        if (options.seconds <= 0.0) throw ValidationError("--secs", "must be > 0");
        const BenchResult r = bench_dispatch(options);
        out << fmt::format("dispatches {}\nrequests {}\nwall_seconds {:.3f}\nrate_per_second {:.1f}\nsequence_digest {:016x}\n",
                           r.dispatches, r.requests, r.wall_seconds, r.rate, r.sequence_digest);
        return kExitOk;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

std::vector<MetricDelta> compare_reports(const RunReport& a, const RunReport& b) {
    std::set<std::string> keys;
    for (const auto& [k, v] : a.metrics.values) keys.insert(k);
    for (const auto& [k, v] : b.metrics.values) keys.insert(k);
    std::vector<MetricDelta> out;
    for (const auto& k : keys) {
        MetricDelta d;
        d.key = k;
        d.a = a.metrics.get(k);
        d.b = b.metrics.get(k);
        d.delta = d.b - d.a;
        if (d.delta == 0.0) {
            d.relative = 0.0;
        } else if (d.a == 0.0) {
            d.relative = std::numeric_limits<double>::quiet_NaN();
        } else {
            d.relative = d.delta / std::abs(d.a);
        }
        out.push_back(d);
    }
    return out;
}

int cmd_compare(const std::string& path_a, const std::string& path_b, std::ostream& out, std::ostream& err) {
    try {
        const RunReport a = RunReport::from_json(sim::load_json(path_a), path_a);
        const RunReport b = RunReport::from_json(sim::load_json(path_b), path_b);
        if (a.scenario_digest != b.scenario_digest) {
            err << fmt::format("warning: scenario digests differ ({} vs {})\n", a.scenario_digest, b.scenario_digest);
        }
        out << fmt::format("{:<40} {:>16} {:>16} {:>16} {:>10}\n", "metric", "a", "b", "delta", "relative");
        for (const auto& d : compare_reports(a, b)) {
            const std::string rel = std::isnan(d.relative) ? "n/a" : fmt::format("{:+.2f}%", 100.0 * d.relative);
            out << fmt::format("{:<40} {:>16.6g} {:>16.6g} {:>+16.6g} {:>10}\n", d.key, d.a, d.b, d.delta, rel);
        }
        return kExitOk;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace volley::cli
