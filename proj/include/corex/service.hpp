#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "corex/pipeline.hpp"

namespace corex {

struct HistoryEntry {
    std::size_t index = 0;
    std::string kind;  // initial | induce | mask
    std::string timestamp;  // UTC, ISO 8601
    EvaluationReport report;
    json detail;  // constraints or mask spec
};

/// Immutable once published; the service swaps whole snapshots.
struct SessionState {
    std::shared_ptr<const Extraction> extraction;
    PipelineConfig config;  // config.constraints are the current constraints
    Learned learned;
    std::vector<HistoryEntry> history;
};

struct ServiceOptions {
    /// Queue concurrent mutations; when false a mutation arriving while
    /// another runs is rejected with 409.
    bool queue_mutations = true;
};

class Service {
public:
    Service(PipelineResult initial, PipelineConfig cfg, std::optional<ModelOracle> oracle, ConceptLabels labels,
            ServiceOptions options = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    std::shared_ptr<const SessionState> snapshot() const;

    /// Re-induces with `constraints` replacing the current ones. Returns false
    /// without touching the state when queueing is off and another mutation
    /// is running.
    bool induce(const ConstraintSet& constraints);
    /// Ablation against the session dataset; appends a history entry.
    std::optional<EvaluationReport> mask(const MaskSpec& spec);

    /// Binds `host:port` (port 0 picks a free port) and returns the port.
    /// Throws Error(io) on failure.
    int bind(const std::string& host, int port);
    void listen();  // blocks until stop()
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace corex
