#include "volley/sim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "volley/core/error.hpp"

namespace volley::sim {

double Distribution::sample(Rng& rng) const {
    switch (kind) {
        case Kind::constant: return a;
        case Kind::uniform: return rng.uniform(a, b);
        case Kind::lognormal: return rng.lognormal(std::log(a), b);
        case Kind::exponential: return rng.exponential(a);
    }
    return a;
}

double Distribution::mean() const {
    switch (kind) {
        case Kind::constant: return a;
        case Kind::uniform: return 0.5 * (a + b);
        case Kind::lognormal: return a * std::exp(0.5 * b * b);
        case Kind::exponential: return a;
    }
    return a;
}

double Distribution::min() const {
    switch (kind) {
        case Kind::constant:
        case Kind::uniform: return a;
        case Kind::lognormal:
        case Kind::exponential: return 0.0;
    }
    return a;
}

double Distribution::cdf(double x) const {
    switch (kind) {
        case Kind::constant: return x >= a ? 1.0 : 0.0;
        case Kind::uniform:
            if (b <= a) return x >= a ? 1.0 : 0.0;
            return std::clamp((x - a) / (b - a), 0.0, 1.0);
        case Kind::lognormal:
            if (x <= 0.0) return 0.0;
            if (b <= 0.0) return x >= a ? 1.0 : 0.0;
            return 0.5 * std::erfc(-(std::log(x / a)) / (b * std::numbers::sqrt2));
        case Kind::exponential: return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x / a);
    }
    return 0.0;
}

int Scenario::host_count() const {
    int n = 0;
    for (const auto& g : hosts) n += g.count;
    return n;
}

double Scenario::max_delay_bound() const {
    double m = 0.0;
    for (const auto& p : projects) m = std::max(m, p.delay_bound_seconds);
    return m;
}

namespace {

/// Walks one JSON object, recording which keys were read so unknown keys can
/// be rejected with their path.
class Reader {
public:
    Reader(const Json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) fail("", "expected an object");
    }

    std::string at(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    [[noreturn]] void fail(std::string_view key, const std::string& what) const {
        throw ValidationError(key.empty() ? path_ : at(key), what);
    }

    const Json* find(std::string_view key) {
        seen_.insert(std::string(key));
        auto it = node_.find(std::string(key));
        return it == node_.end() ? nullptr : &*it;
    }

    bool has(std::string_view key) const { return node_.contains(std::string(key)); }

    double number(std::string_view key, double fallback) {
        const Json* v = find(key);
        if (v == nullptr) return fallback;
        if (!v->is_number()) fail(key, "expected a number");
        const double x = v->get<double>();
        if (!std::isfinite(x)) fail(key, "must be finite");
        return x;
    }

    double required_number(std::string_view key) {
        if (!has(key)) fail(key, "required");
        return number(key, 0.0);
    }

    long integer(std::string_view key, long fallback) {
        const Json* v = find(key);
        if (v == nullptr) return fallback;
        if (!v->is_number_integer()) fail(key, "expected an integer");
        return v->get<long>();
    }

    bool boolean(std::string_view key, bool fallback) {
        const Json* v = find(key);
        if (v == nullptr) return fallback;
        if (!v->is_boolean()) fail(key, "expected true or false");
        return v->get<bool>();
    }

    std::string string(std::string_view key, const std::string& fallback) {
        const Json* v = find(key);
        if (v == nullptr) return fallback;
        if (!v->is_string()) fail(key, "expected a string");
        return v->get<std::string>();
    }

    std::vector<std::string> strings(std::string_view key, std::vector<std::string> fallback) {
        const Json* v = find(key);
        if (v == nullptr) return fallback;
        if (!v->is_array()) fail(key, "expected an array of strings");
        std::vector<std::string> out;
        for (const auto& e : *v) {
            if (!e.is_string()) fail(key, "expected an array of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    Distribution distribution(std::string_view key, Distribution fallback) {
        const Json* v = find(key);
        if (v == nullptr) return fallback;
        const std::string p = at(key);
        if (v->is_number()) return Distribution::constant(v->get<double>());
        if (!v->is_object() || v->size() != 1) {
            throw ValidationError(p, "expected a number or a one-key distribution object");
        }
        const auto& [name, arg] = *v->items().begin();
        auto pair = [&]() -> std::pair<double, double> {
            if (!arg.is_array() || arg.size() != 2 || !arg[0].is_number() || !arg[1].is_number()) {
                throw ValidationError(p + "." + name, "expected [number, number]");
            }
            return {arg[0].get<double>(), arg[1].get<double>()};
        };
        if (name == "uniform") {
            auto [lo, hi] = pair();
            if (hi < lo) throw ValidationError(p + ".uniform", "upper bound below lower bound");
            return Distribution::uniform(lo, hi);
        }
        if (name == "lognormal") {
            auto [median, sigma] = pair();
            if (median <= 0.0 || sigma < 0.0) {
                throw ValidationError(p + ".lognormal", "median must be > 0 and sigma >= 0");
            }
            return Distribution::lognormal(median, sigma);
        }
        if (name == "exponential") {
            if (!arg.is_number() || arg.get<double>() <= 0.0) {
                throw ValidationError(p + ".exponential", "mean must be a positive number");
            }
            return Distribution::exponential(arg.get<double>());
        }
        throw ValidationError(p, "unknown distribution '" + name + "'");
    }

    Reader child(std::string_view key) {
        const Json* v = find(key);
        static const Json empty = Json::object();
        return Reader(v == nullptr ? empty : *v, at(key));
    }

    void done() const {
        for (const auto& [k, v] : node_.items()) {
            if (!seen_.contains(k)) throw ValidationError(at(k), "unknown key");
        }
    }

private:
    const Json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

void check(bool ok, const std::string& path, const std::string& what) {
    if (!ok) throw ValidationError(path, what);
}

void check_positive(const Distribution& d, const std::string& path) {
    check(d.kind == Distribution::Kind::lognormal || d.kind == Distribution::Kind::exponential ||
              d.min() > 0.0,
          path, "must be positive");
}

void check_fraction(const Distribution& d, const std::string& path) {
    check_positive(d, path);
    check(d.kind == Distribution::Kind::constant || d.kind == Distribution::Kind::uniform, path,
          "must be a constant or uniform");
    check((d.kind == Distribution::Kind::constant ? d.a : d.b) <= 1.0, path, "must be at most 1");
}

ResourceKind resource_kind(const std::string& name, const std::string& path) {
    auto k = parse_resource_kind(name);
    if (!k) throw ValidationError(path, "unknown resource '" + name + "'");
    return *k;
}

KeywordPref keyword_pref(const Json& v, const std::string& path) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "yes") return KeywordPref::yes;
        if (s == "no") return KeywordPref::no;
        if (s == "neutral") return KeywordPref::neutral;
    }
    throw ValidationError(path, "expected \"yes\", \"no\" or \"neutral\"");
}

std::string_view keyword_pref_name(KeywordPref p) {
    switch (p) {
        case KeywordPref::yes: return "yes";
        case KeywordPref::no: return "no";
        case KeywordPref::neutral: return "neutral";
    }
    return "neutral";
}

HostGroup parse_host_group(Reader r) {
    HostGroup g;
    g.count = static_cast<int>(r.integer("count", g.count));
    check(g.count >= 1, r.at("count"), "must be at least 1");
    g.cpus = static_cast<int>(r.integer("cpus", g.cpus));
    check(g.cpus >= 1, r.at("cpus"), "must be at least 1");
    g.cpu_flops = r.distribution("cpu_flops", g.cpu_flops);
    check_positive(g.cpu_flops, r.at("cpu_flops"));
    g.efficiency = r.distribution("efficiency", g.efficiency);
    check_fraction(g.efficiency, r.at("efficiency"));
    if (r.has("gpu")) {
        Reader gr = r.child("gpu");
        GpuSpec gpu;
        gpu.kind = resource_kind(gr.string("kind", "nvidia"), gr.at("kind"));
        check(is_gpu(gpu.kind), gr.at("kind"), "must be a GPU kind");
        gpu.count = static_cast<int>(gr.integer("count", gpu.count));
        check(gpu.count >= 1, gr.at("count"), "must be at least 1");
        gpu.flops = gr.distribution("flops", gpu.flops);
        check_positive(gpu.flops, gr.at("flops"));
        gpu.efficiency = gr.distribution("efficiency", gpu.efficiency);
        check_fraction(gpu.efficiency, gr.at("efficiency"));
        gr.done();
        g.gpu = gpu;
    }
    g.mean_on_seconds = r.number("mean_on_seconds", g.mean_on_seconds);
    g.mean_off_seconds = r.number("mean_off_seconds", g.mean_off_seconds);
    check(g.mean_on_seconds >= 0.0, r.at("mean_on_seconds"), "must be >= 0");
    check(g.mean_on_seconds == 0.0 || g.mean_off_seconds > 0.0, r.at("mean_off_seconds"),
          "must be > 0 when mean_on_seconds is set");
    g.departure_rate = r.number("departure_rate", g.departure_rate);
    check(g.departure_rate >= 0.0, r.at("departure_rate"), "must be >= 0");
    g.throttle_duty_cycle = r.number("throttle_duty_cycle", g.throttle_duty_cycle);
    check(g.throttle_duty_cycle > 0.0 && g.throttle_duty_cycle <= 1.0, r.at("throttle_duty_cycle"),
          "must be in (0, 1]");
    g.ram_bytes = r.number("ram_bytes", g.ram_bytes);
    check(g.ram_bytes > 0.0, r.at("ram_bytes"), "must be > 0");
    g.disk_bytes = r.number("disk_bytes", g.disk_bytes);
    check(g.disk_bytes >= 0.0, r.at("disk_bytes"), "must be >= 0");
    g.os = r.strings("os", g.os);
    g.vendor = r.strings("vendor", g.vendor);
    g.model = r.strings("model", g.model);
    check(!g.os.empty(), r.at("os"), "must not be empty");
    check(!g.vendor.empty(), r.at("vendor"), "must not be empty");
    check(!g.model.empty(), r.at("model"), "must not be empty");
    g.driver_version = static_cast<int>(r.integer("driver_version", g.driver_version));
    for (auto [key, field] : {std::pair{"faulty_fraction", &g.faulty_fraction},
                              std::pair{"faulty_prob", &g.faulty_prob},
                              std::pair{"malicious_fraction", &g.malicious_fraction},
                              std::pair{"malicious_prob", &g.malicious_prob},
                              std::pair{"crash_prob", &g.crash_prob}}) {
        *field = r.number(key, *field);
        check(*field >= 0.0 && *field <= 1.0, r.at(key), "must be in [0, 1]");
    }
    check(g.faulty_fraction + g.malicious_fraction <= 1.0, r.at("malicious_fraction"),
          "faulty_fraction + malicious_fraction exceeds 1");
    if (const Json* kp = r.find("keyword_prefs")) {
        check(kp->is_object(), r.at("keyword_prefs"), "expected an object");
        for (const auto& [k, v] : kp->items()) {
            g.keyword_prefs[k] = keyword_pref(v, r.at("keyword_prefs") + "." + k);
        }
    }
    r.done();
    return g;
}

VersionSpec parse_version(Reader r) {
    VersionSpec v;
    if (const Json* res = r.find("resources")) {
        const std::string p = r.at("resources");
        check(res->is_object() && !res->empty(), p, "expected a nonempty object of usages");
        v.resources.clear();
        for (const auto& [k, amount] : res->items()) {
            check(amount.is_number() && amount.get<double>() > 0.0, p + "." + k, "must be a positive number");
            v.resources[resource_kind(k, p + "." + k)] = amount.get<double>();
        }
    }
    v.os_allow = r.strings("os_allow", v.os_allow);
    v.min_driver_version = static_cast<int>(r.integer("min_driver_version", v.min_driver_version));
    v.efficiency = r.number("efficiency", v.efficiency);
    check(v.efficiency > 0.0 && v.efficiency <= 1.0, r.at("efficiency"), "must be in (0, 1]");
    r.done();
    return v;
}

ProjectSpec parse_project(Reader r, std::size_t index) {
    ProjectSpec p;
    p.name = r.string("name", fmt::format("p{}", index));
    p.share = r.number("share", p.share);
    check(p.share > 0.0, r.at("share"), "must be > 0");
    if (const Json* vs = r.find("versions")) {
        check(vs->is_array() && !vs->empty(), r.at("versions"), "expected a nonempty array");
        p.versions.clear();
        for (std::size_t i = 0; i < vs->size(); ++i) {
            p.versions.push_back(parse_version(Reader((*vs)[i], fmt::format("{}[{}]", r.at("versions"), i))));
        }
    }
    p.delay_bound_seconds = r.required_number("delay_bound_seconds");
    check(p.delay_bound_seconds > 0.0, r.at("delay_bound_seconds"), "must be > 0");
    p.est_flop_count = r.distribution("est_flop_count", p.est_flop_count);
    check_positive(p.est_flop_count, r.at("est_flop_count"));
    p.true_flop_ratio = r.distribution("true_flop_ratio", p.true_flop_ratio);
    check_positive(p.true_flop_ratio, r.at("true_flop_ratio"));
    p.runtime_noise_sigma = r.number("runtime_noise_sigma", p.runtime_noise_sigma);
    check(p.runtime_noise_sigma >= 0.0, r.at("runtime_noise_sigma"), "must be >= 0");
    p.est_wss_bytes = r.number("est_wss_bytes", p.est_wss_bytes);
    check(p.est_wss_bytes >= 0.0, r.at("est_wss_bytes"), "must be >= 0");
    p.disk_bound_bytes = r.number("disk_bound_bytes", p.disk_bound_bytes);
    check(p.disk_bound_bytes >= 0.0, r.at("disk_bound_bytes"), "must be >= 0");
    p.min_quorum = static_cast<int>(r.integer("min_quorum", p.min_quorum));
    check(p.min_quorum >= 1, r.at("min_quorum"), "must be at least 1");
    p.init_ninstances = static_cast<int>(r.integer("init_ninstances", p.min_quorum));
    check(p.init_ninstances >= p.min_quorum, r.at("init_ninstances"), "must be at least min_quorum");
    p.max_error_instances = static_cast<int>(r.integer("max_error_instances", p.max_error_instances));
    check(p.max_error_instances >= 0, r.at("max_error_instances"), "must be >= 0");
    p.max_success_instances = static_cast<int>(r.integer("max_success_instances", p.max_success_instances));
    check(p.max_success_instances >= p.min_quorum, r.at("max_success_instances"),
          "must be at least min_quorum");
    p.keywords = r.strings("keywords", p.keywords);
    p.input_files = r.strings("input_files", p.input_files);
    p.batch_size = static_cast<int>(r.integer("batch_size", p.batch_size));
    check(p.batch_size >= 0, r.at("batch_size"), "must be >= 0");
    p.batch_interval_seconds = r.number("batch_interval_seconds", p.batch_interval_seconds);
    check(p.batch_interval_seconds >= 0.0, r.at("batch_interval_seconds"), "must be >= 0");
    p.total_jobs = static_cast<int>(r.integer("total_jobs", p.total_jobs));
    check(p.total_jobs >= 0, r.at("total_jobs"), "must be >= 0");
    p.backlog = static_cast<int>(r.integer("backlog", p.backlog));
    check(p.backlog >= 0, r.at("backlog"), "must be >= 0");
    r.done();
    return p;
}

Json distribution_json(const Distribution& d) {
    switch (d.kind) {
        case Distribution::Kind::constant: return d.a;
        case Distribution::Kind::uniform: return Json{{"uniform", {d.a, d.b}}};
        case Distribution::Kind::lognormal: return Json{{"lognormal", {d.a, d.b}}};
        case Distribution::Kind::exponential: return Json{{"exponential", d.a}};
    }
    return d.a;
}

}  // namespace

Scenario parse_scenario(const Json& doc) {
    Reader r(doc, "");
    Scenario s;
    if (const Json* seed = r.find("seed")) {
        check(seed->is_number_unsigned() || (seed->is_number_integer() && seed->get<long long>() >= 0),
              "seed", "expected a nonnegative integer");
        s.seed = seed->get<std::uint64_t>();
    }
    s.duration_seconds = r.required_number("duration_seconds");
    check(s.duration_seconds > 0.0, "duration_seconds", "must be > 0");
    s.warmup_jobs = static_cast<int>(r.integer("warmup_jobs", 0));
    check(s.warmup_jobs >= 0, "warmup_jobs", "must be >= 0");

    const Json* hosts = r.find("hosts");
    check(hosts != nullptr, "hosts", "required");
    check(hosts->is_array() && !hosts->empty(), "hosts", "expected a nonempty array of host groups");
    for (std::size_t i = 0; i < hosts->size(); ++i) {
        s.hosts.push_back(parse_host_group(Reader((*hosts)[i], fmt::format("hosts[{}]", i))));
    }
    const Json* projects = r.find("projects");
    check(projects != nullptr, "projects", "required");
    check(projects->is_array() && !projects->empty(), "projects", "expected a nonempty array");
    for (std::size_t i = 0; i < projects->size(); ++i) {
        s.projects.push_back(parse_project(Reader((*projects)[i], fmt::format("projects[{}]", i)), i));
    }

    Reader c = r.child("client");
    s.client.buffer_lo_seconds = c.number("buffer_lo_seconds", s.client.buffer_lo_seconds);
    s.client.buffer_hi_seconds = c.number("buffer_hi_seconds", s.client.buffer_hi_seconds);
    check(s.client.buffer_lo_seconds >= 0.0, c.at("buffer_lo_seconds"), "must be >= 0");
    check(s.client.buffer_hi_seconds >= s.client.buffer_lo_seconds, c.at("buffer_hi_seconds"),
          "must be at least buffer_lo_seconds");
    const long batch = c.integer("report_batch", static_cast<long>(s.client.report_batch));
    check(batch >= 1, c.at("report_batch"), "must be at least 1");
    s.client.report_batch = static_cast<std::size_t>(batch);
    s.client.report_margin_fraction = c.number("report_margin_fraction", s.client.report_margin_fraction);
    check(s.client.report_margin_fraction >= 0.0 && s.client.report_margin_fraction <= 1.0,
          c.at("report_margin_fraction"), "must be in [0, 1]");
    s.client.rpc_latency_seconds = c.number("rpc_latency_seconds", s.client.rpc_latency_seconds);
    check(s.client.rpc_latency_seconds >= 0.0, c.at("rpc_latency_seconds"), "must be >= 0");
    s.client.checkpoint_interval_seconds =
        c.number("checkpoint_interval_seconds", s.client.checkpoint_interval_seconds);
    check(s.client.checkpoint_interval_seconds > 0.0, c.at("checkpoint_interval_seconds"), "must be > 0");
    c.done();

    Reader p = r.child("policy");
    auto& pol = s.policy;
    pol.edf_enabled = p.boolean("edf_enabled", pol.edf_enabled);
    pol.adaptive_replication = p.boolean("adaptive_replication", pol.adaptive_replication);
    pol.replication_threshold = static_cast<int>(p.integer("replication_threshold", pol.replication_threshold));
    check(pol.replication_threshold >= 1, p.at("replication_threshold"), "must be at least 1");
    const std::string hr = p.string("hr_level", std::string(to_string(pol.hr_level)));
    auto level = parse_hr_level(hr);
    check(level.has_value(), p.at("hr_level"), "expected none, coarse or fine");
    pol.hr_level = *level;
    pol.homogeneous_app_version = p.boolean("homogeneous_app_version", pol.homogeneous_app_version);
    {
        Reader w = p.child("score_weights");
        auto& sw = pol.score_weights;
        sw.keyword = w.number("keyword", sw.keyword);
        sw.allocation = w.number("allocation", sw.allocation);
        sw.skipped = w.number("skipped", sw.skipped);
        sw.locality = w.number("locality", sw.locality);
        sw.size = w.number("size", sw.size);
        w.done();
    }
    const long slots = p.integer("cache_slots", static_cast<long>(pol.cache_slots));
    check(slots >= 1, p.at("cache_slots"), "must be at least 1");
    pol.cache_slots = static_cast<std::size_t>(slots);
    pol.time_slice_seconds = p.number("time_slice_seconds", pol.time_slice_seconds);
    check(pol.time_slice_seconds > 0.0, p.at("time_slice_seconds"), "must be > 0");
    pol.count_timeouts_as_errors = p.boolean("count_timeouts_as_errors", pol.count_timeouts_as_errors);
    pol.purge_grace_seconds = p.number("purge_grace_seconds", pol.purge_grace_seconds);
    check(pol.purge_grace_seconds >= 0.0, p.at("purge_grace_seconds"), "must be >= 0");
    pol.collusion = p.boolean("collusion", pol.collusion);
    pol.size_classes = static_cast<int>(p.integer("size_classes", pol.size_classes));
    check(pol.size_classes >= 1, p.at("size_classes"), "must be at least 1");
    pol.skip_bonus_age_seconds = p.number("skip_bonus_age_seconds", pol.skip_bonus_age_seconds);
    check(pol.skip_bonus_age_seconds >= 0.0, p.at("skip_bonus_age_seconds"), "must be >= 0");
    pol.fuzzy_tolerance = p.number("fuzzy_tolerance", pol.fuzzy_tolerance);
    check(pol.fuzzy_tolerance >= 0.0, p.at("fuzzy_tolerance"), "must be >= 0");
    p.done();

    r.done();
    return s;
}

Json emit_scenario(const Scenario& s) {
    Json doc;
    doc["seed"] = s.seed;
    doc["duration_seconds"] = s.duration_seconds;
    doc["warmup_jobs"] = s.warmup_jobs;
    doc["hosts"] = Json::array();
    for (const auto& g : s.hosts) {
        Json h;
        h["count"] = g.count;
        h["cpus"] = g.cpus;
        h["cpu_flops"] = distribution_json(g.cpu_flops);
        h["efficiency"] = distribution_json(g.efficiency);
        if (g.gpu) {
            h["gpu"] = Json{{"kind", std::string(to_string(g.gpu->kind))},
                            {"count", g.gpu->count},
                            {"flops", distribution_json(g.gpu->flops)},
                            {"efficiency", distribution_json(g.gpu->efficiency)}};
        }
        h["mean_on_seconds"] = g.mean_on_seconds;
        h["mean_off_seconds"] = g.mean_off_seconds;
        h["departure_rate"] = g.departure_rate;
        h["throttle_duty_cycle"] = g.throttle_duty_cycle;
        h["ram_bytes"] = g.ram_bytes;
        h["disk_bytes"] = g.disk_bytes;
        h["os"] = g.os;
        h["vendor"] = g.vendor;
        h["model"] = g.model;
        h["driver_version"] = g.driver_version;
        h["faulty_fraction"] = g.faulty_fraction;
        h["faulty_prob"] = g.faulty_prob;
        h["malicious_fraction"] = g.malicious_fraction;
        h["malicious_prob"] = g.malicious_prob;
        h["crash_prob"] = g.crash_prob;
        Json kp = Json::object();
        for (const auto& [k, v] : g.keyword_prefs) kp[k] = std::string(keyword_pref_name(v));
        h["keyword_prefs"] = kp;
        doc["hosts"].push_back(h);
    }
    doc["projects"] = Json::array();
    for (const auto& p : s.projects) {
        Json j;
        j["name"] = p.name;
        j["share"] = p.share;
        j["versions"] = Json::array();
        for (const auto& v : p.versions) {
            Json res = Json::object();
            for (const auto& [k, amount] : v.resources) res[std::string(to_string(k))] = amount;
            j["versions"].push_back(Json{{"resources", res},
                                         {"os_allow", v.os_allow},
                                         {"min_driver_version", v.min_driver_version},
                                         {"efficiency", v.efficiency}});
        }
        j["delay_bound_seconds"] = p.delay_bound_seconds;
        j["est_flop_count"] = distribution_json(p.est_flop_count);
        j["true_flop_ratio"] = distribution_json(p.true_flop_ratio);
        j["runtime_noise_sigma"] = p.runtime_noise_sigma;
        j["est_wss_bytes"] = p.est_wss_bytes;
        j["disk_bound_bytes"] = p.disk_bound_bytes;
        j["min_quorum"] = p.min_quorum;
        j["init_ninstances"] = p.init_ninstances;
        j["max_error_instances"] = p.max_error_instances;
        j["max_success_instances"] = p.max_success_instances;
        j["keywords"] = p.keywords;
        j["input_files"] = p.input_files;
        j["batch_size"] = p.batch_size;
        j["batch_interval_seconds"] = p.batch_interval_seconds;
        j["total_jobs"] = p.total_jobs;
        j["backlog"] = p.backlog;
        doc["projects"].push_back(j);
    }
    doc["client"] = Json{{"buffer_lo_seconds", s.client.buffer_lo_seconds},
                         {"buffer_hi_seconds", s.client.buffer_hi_seconds},
                         {"report_batch", s.client.report_batch},
                         {"report_margin_fraction", s.client.report_margin_fraction},
                         {"rpc_latency_seconds", s.client.rpc_latency_seconds},
                         {"checkpoint_interval_seconds", s.client.checkpoint_interval_seconds}};
    const auto& pol = s.policy;
    const auto& sw = pol.score_weights;
    doc["policy"] = Json{{"edf_enabled", pol.edf_enabled},
                         {"adaptive_replication", pol.adaptive_replication},
                         {"replication_threshold", pol.replication_threshold},
                         {"hr_level", std::string(to_string(pol.hr_level))},
                         {"homogeneous_app_version", pol.homogeneous_app_version},
                         {"score_weights", Json{{"keyword", sw.keyword},
                                                {"allocation", sw.allocation},
                                                {"skipped", sw.skipped},
                                                {"locality", sw.locality},
                                                {"size", sw.size}}},
                         {"cache_slots", pol.cache_slots},
                         {"time_slice_seconds", pol.time_slice_seconds},
                         {"count_timeouts_as_errors", pol.count_timeouts_as_errors},
                         {"purge_grace_seconds", pol.purge_grace_seconds},
                         {"collusion", pol.collusion},
                         {"size_classes", pol.size_classes},
                         {"skip_bonus_age_seconds", pol.skip_bonus_age_seconds},
                         {"fuzzy_tolerance", pol.fuzzy_tolerance}};
    return doc;
}

Json canonicalize(const Json& doc) {
    return emit_scenario(parse_scenario(doc));
}

std::string scenario_digest(const Json& doc) {
    return fmt::format("{:016x}", fnv1a(canonicalize(doc).dump()));
}

void apply_override(Json& doc, std::string_view path, std::string_view value) {
    const std::string full(path);
    Json* node = &doc;
    std::size_t i = 0;
    auto descend_key = [&](const std::string& key) {
        if (key.empty()) throw ValidationError(full, "malformed key path");
        if (node->is_null()) *node = Json::object();
        if (!node->is_object()) throw ValidationError(full, "'" + key + "' is not inside an object");
        node = &(*node)[key];
    };
    std::string key;
    while (i < full.size()) {
        const char ch = full[i];
        if (ch == '.') {
            descend_key(key);
            key.clear();
            ++i;
        } else if (ch == '[') {
            if (!key.empty()) {
                descend_key(key);
                key.clear();
            }
            const auto close = full.find(']', i);
            if (close == std::string::npos) throw ValidationError(full, "unclosed '['");
            std::size_t idx = 0;
            try {
                idx = std::stoul(full.substr(i + 1, close - i - 1));
            } catch (const std::exception&) {
                throw ValidationError(full, "bad array index");
            }
            if (!node->is_array() || idx >= node->size()) {
                throw ValidationError(full, fmt::format("index {} out of range", idx));
            }
            node = &(*node)[idx];
            i = close + 1;
            if (i < full.size() && full[i] == '.') ++i;
        } else {
            key += ch;
            ++i;
        }
    }
    if (!key.empty()) descend_key(key);
    Json parsed = Json::parse(value, nullptr, false);
    *node = parsed.is_discarded() ? Json(std::string(value)) : parsed;
}

Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path, "cannot open file");
    Json doc = Json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ValidationError(path, "not valid JSON");
    return doc;
}

}  // namespace volley::sim
