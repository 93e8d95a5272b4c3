#include "corex/service.hpp"

#include <chrono>
#include <ctime>
#include <mutex>

#include <httplib.h>

namespace corex {

namespace {

std::string utc_now()
{
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[96];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                  tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return buf;
}

json history_json(const HistoryEntry& h)
{
    return {{"index", h.index}, {"kind", h.kind}, {"timestamp", h.timestamp}, {"report", to_json(h.report)}, {"detail", h.detail}};
}

int status_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::unknown_sample: return 404;
    case ErrorCode::io:
    case ErrorCode::oracle: return 500;
    default: return 400;
    }
}

void send_json(httplib::Response& res, const json& body, int status = 200)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message)
{
    send_json(res, {{"error", code}, {"message", message}}, status);
}

json parse_body(const httplib::Request& req)
{
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::parse, std::string("request body is not valid JSON: ") + e.what());
    }
}

}  // namespace

struct Service::Impl {
    mutable std::mutex state_mutex;  // guards the pointer swap only
    std::shared_ptr<const SessionState> state;
    std::mutex mutation_mutex;
    std::optional<ModelOracle> oracle;
    ConceptLabels labels;
    ServiceOptions options;
    httplib::Server server;

    std::shared_ptr<const SessionState> current() const
    {
        std::lock_guard lock(state_mutex);
        return state;
    }

    void publish(std::shared_ptr<const SessionState> next)
    {
        std::lock_guard lock(state_mutex);
        state = std::move(next);
    }

    std::unique_lock<std::mutex> acquire_mutation()
    {
        if (options.queue_mutations) return std::unique_lock(mutation_mutex);
        return std::unique_lock(mutation_mutex, std::try_to_lock);
    }

    void routes(Service& self);
};

Service::Service(PipelineResult initial, PipelineConfig cfg, std::optional<ModelOracle> oracle, ConceptLabels labels,
                 ServiceOptions options)
    : impl_(std::make_unique<Impl>())
{
    auto state = std::make_shared<SessionState>();
    state->extraction = std::move(initial.extraction);
    state->config = std::move(cfg);
    state->learned = std::move(initial.learned);
    state->history.push_back({0, "initial", utc_now(), state->learned.report, {{"constraints", to_json(state->config.constraints)}}});
    impl_->state = std::move(state);
    impl_->oracle = std::move(oracle);
    impl_->labels = std::move(labels);
    impl_->options = options;
    impl_->routes(*this);
}

Service::~Service() { stop(); }

std::shared_ptr<const SessionState> Service::snapshot() const { return impl_->current(); }

bool Service::induce(const ConstraintSet& constraints)
{
    auto lock = impl_->acquire_mutation();
    if (!lock.owns_lock()) return false;
    const auto base = impl_->current();
    auto next = std::make_shared<SessionState>(*base);
    next->config.constraints = constraints;
    next->learned = learn(*base->extraction, next->config);
    next->history.push_back({next->history.size(), "induce", utc_now(), next->learned.report,
                             {{"constraints", to_json(constraints)}}});
    impl_->publish(std::move(next));
    return true;
}

std::optional<EvaluationReport> Service::mask(const MaskSpec& spec_in)
{
    if (!impl_->oracle) throw Error(ErrorCode::config, "no model oracle is available for this dataset");
    auto lock = impl_->acquire_mutation();
    if (!lock.owns_lock()) return std::nullopt;
    const auto base = impl_->current();
    const MaskSpec spec =
        spec_in.label == MaskLabel::custom ? spec_in : make_mask(spec_in.label, base->learned.partition);
    const EvaluationReport report = ablate(base->extraction->dataset, spec, *impl_->oracle);
    auto next = std::make_shared<SessionState>(*base);
    next->history.push_back({next->history.size(), "mask", utc_now(), report, {{"mask", to_json(spec)}}});
    impl_->publish(std::move(next));
    return report;
}

void Service::Impl::routes(Service& self)
{
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const Error& e) {
            send_error(res, status_for(e.code()), to_string(e.code()), e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, "Internal", e.what());
        }
    });
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (res.body.empty()) send_error(res, res.status, "HttpError", "no route for " + req.method + " " + req.path);
    });
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });

    server.Get("/samples", [this](const httplib::Request&, httplib::Response& res) {
        const auto s = current();
        const auto& ds = s->extraction->dataset;
        json out = json::array();
        for (std::size_t i = 0; i < ds.samples.size(); ++i) {
            const auto& r = ds.samples[i];
            out.push_back({{"sample_id", r.sample_id},
                           {"ground_truth", to_string(r.ground_truth)},
                           {"model_truth", to_string(r.model_truth)},
                           {"explainer_truth", to_string(s->learned.explainer_truth[i])},
                           {"regions", s->extraction->geometry[i].regions.size()},
                           {"facts", s->extraction->geometry[i].facts.size()}});
        }
        send_json(res, out);
    });

    server.Get(R"(/samples/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        const auto s = current();
        const std::string id = req.matches[1];
        const auto& ds = s->extraction->dataset;
        const SampleRecord* rec = ds.find(id);
        if (!rec) throw Error(ErrorCode::unknown_sample, "unknown sample '" + id + "'");
        const SampleGeometry& g = *s->extraction->geometry_of(id);
        json grids = json::array();
        for (const auto& grid : rec->grids) {
            double sum = 0.0;
            for (float v : grid.values) sum += v;
            grids.push_back({{"concept_id", grid.concept_id},
                             {"height", grid.height},
                             {"width", grid.width},
                             {"total_relevance", sum},
                             {"values", grid.values}});
        }
        json retained = json::array();
        for (const auto& c : g.retained)
            retained.push_back({{"concept_id", c.concept_id}, {"total_relevance", c.total_relevance}, {"sign", to_string(c.sign)}});
        json regions = json::array();
        for (const auto& r : g.regions) regions.push_back(to_json(r));
        json facts = json::array();
        for (const auto& lit : s->extraction->kb.facts_of(id)) facts.push_back(render_literal(lit, id));
        std::vector<std::size_t> covering;
        for (std::size_t i = 0; i < s->learned.theory.clauses.size(); ++i)
            if (covers(s->learned.theory.clauses[i], s->extraction->kb.facts_of(id))) covering.push_back(i);
        send_json(res, {{"sample_id", id},
                        {"ground_truth", to_string(rec->ground_truth)},
                        {"model_truth", to_string(rec->model_truth)},
                        {"covering_clauses", covering},
                        {"grids", grids},
                        {"retained", retained},
                        {"regions", regions},
                        {"facts", facts}});
    });

    server.Get("/theory", [this](const httplib::Request&, httplib::Response& res) {
        const auto s = current();
        send_json(res, to_json(s->learned.theory, s->extraction->dataset.class_name, labels));
    });

    server.Get("/clusters", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, to_json(current()->learned.clusters));
    });

    server.Get("/ranks", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, to_json(current()->learned.ranks));
    });

    server.Get(R"(/explanations/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        const auto s = current();
        const std::string id = req.matches[1];
        if (!s->extraction->dataset.find(id)) throw Error(ErrorCode::unknown_sample, "unknown sample '" + id + "'");
        std::optional<std::size_t> clause;
        if (req.has_param("clause")) {
            try {
                clause = std::stoul(req.get_param_value("clause"));
            } catch (const std::exception&) {
                throw Error(ErrorCode::invalid_input, "clause must be a non-negative integer");
            }
        }
        const auto report = contrastive(s->learned.theory, id, s->extraction->kb.facts_of(id), clause, labels);
        json out = to_json(report);
        out["clause"] = to_json(s->learned.theory.clauses[report.clause_index], report.clause_index,
                                s->extraction->dataset.class_name, labels);
        send_json(res, out);
    });

    server.Get("/metrics", [this](const httplib::Request&, httplib::Response& res) {
        const auto s = current();
        json history = json::array();
        for (const auto& h : s->history) history.push_back(history_json(h));
        json out = to_json(s->learned.report);
        out["constraints"] = to_json(s->config.constraints);
        out["history"] = history;
        send_json(res, out);
    });

    server.Post("/induce", [this, &self](const httplib::Request& req, httplib::Response& res) {
        const json body = parse_body(req);
        if (!body.is_object()) throw Error(ErrorCode::invalid_input, "request body must be a JSON object");
        const ConstraintSet constraints =
            body.contains("constraints") ? constraints_from_json(body.at("constraints")) : current()->config.constraints;
        if (!self.induce(constraints)) {
            send_error(res, 409, "Busy", "another mutation is in progress");
            return;
        }
        const auto s = current();
        send_json(res, {{"theory", to_json(s->learned.theory, s->extraction->dataset.class_name, labels)},
                        {"evaluation", to_json(s->learned.report)},
                        {"history_length", s->history.size()}});
    });

    server.Post("/mask", [this, &self](const httplib::Request& req, httplib::Response& res) {
        const json body = parse_body(req);
        const MaskSpec spec = mask_spec_from_json(body.contains("spec") ? body.at("spec") : body);
        const auto report = self.mask(spec);
        if (!report) {
            send_error(res, 409, "Busy", "another mutation is in progress");
            return;
        }
        const auto s = current();
        json out = to_json(*report);
        out["mask"] = s->history.back().detail.at("mask");
        out["history_length"] = s->history.size();
        send_json(res, out);
    });
}

int Service::bind(const std::string& host, int port)
{
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw Error(ErrorCode::io, "cannot bind " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port))
        throw Error(ErrorCode::io, "cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void Service::listen() { impl_->server.listen_after_bind(); }

void Service::stop()
{
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace corex
