#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "volley/core/ids.hpp"
#include "volley/core/time.hpp"

namespace volley {

/// One trace line: `t=<ms> ev=<name> k=v ...` with keys sorted and decimals
/// printed at fixed precision, so equal runs give byte-equal traces.
class TraceRecord {
public:
    TraceRecord(SimMs t, std::string_view event) : t_(t), event_(event) {}

    TraceRecord& add(std::string_view key, std::string_view value);
    TraceRecord& add(std::string_view key, const char* value) { return add(key, std::string_view(value)); }
    TraceRecord& add(std::string_view key, const std::string& value) { return add(key, std::string_view(value)); }
    TraceRecord& add(std::string_view key, std::int64_t value);
    TraceRecord& add(std::string_view key, int value) { return add(key, static_cast<std::int64_t>(value)); }
    TraceRecord& add(std::string_view key, std::uint64_t value);
    TraceRecord& add(std::string_view key, std::uint32_t value) { return add(key, static_cast<std::uint64_t>(value)); }
    TraceRecord& add(std::string_view key, double value);
    TraceRecord& add(std::string_view key, bool value);
    TraceRecord& add(std::string_view key, InstanceId id);
    template <typename Tag>
    TraceRecord& add(std::string_view key, StrongId<Tag> id) { return add(key, id.value); }

    SimMs time() const { return t_; }
    const std::string& event() const { return event_; }
    /// Value of `key`, empty if absent.
    std::string_view get(std::string_view key) const;
    std::string str() const;

private:
    SimMs t_;
    std::string event_;
    std::vector<std::pair<std::string, std::string>> fields_;
};

/// Fixed-precision decimal used in traces and metrics documents.
std::string format_decimal(double value);

class TraceSink {
public:
    virtual ~TraceSink() = default;
    virtual void emit(const TraceRecord& record) = 0;
};

/// Discards records.
class NullTrace final : public TraceSink {
public:
    void emit(const TraceRecord&) override {}
};

/// Writes one line per record.
class StreamTrace final : public TraceSink {
public:
    explicit StreamTrace(std::ostream& out) : out_(out) {}
    void emit(const TraceRecord& record) override;

private:
    std::ostream& out_;
};

/// Keeps records in memory; used by tests and trace-level checks.
class MemoryTrace final : public TraceSink {
public:
    void emit(const TraceRecord& record) override { records_.push_back(record); }
    const std::vector<TraceRecord>& records() const { return records_; }
    std::string text() const;

private:
    std::vector<TraceRecord> records_;
};

/// Forwards to several sinks.
class TeeTrace final : public TraceSink {
public:
    void attach(TraceSink* sink) { sinks_.push_back(sink); }
    void emit(const TraceRecord& record) override {
        for (auto* s : sinks_) s->emit(record);
    }

private:
    std::vector<TraceSink*> sinks_;
};

}  // namespace volley
