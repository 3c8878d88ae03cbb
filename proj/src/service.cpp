#include "glens/service.hpp"

#include <algorithm>
#include <charconv>

#include "glens/community.hpp"
#include "glens/contagion.hpp"
#include "glens/error.hpp"
#include "glens/financials.hpp"
#include "glens/hash.hpp"
#include "glens/metrics.hpp"
#include "glens/patterns.hpp"
#include "glens/risk.hpp"
#include "httplib.h"

namespace glens::service {

using nlohmann::json;
using glens::to_string;

// ---- dataset ------------------------------------------------------------------------------

std::shared_ptr<const Dataset> make_dataset(ingest::TableSet tables, std::string source) {
    auto d = std::make_shared<Dataset>();
    d->network = ingest::join_to_network(tables);
    d->tables = std::move(tables);
    d->source = std::move(source);
    return d;
}

std::shared_ptr<const Dataset> load_dataset(const std::filesystem::path& root) {
    std::filesystem::path manifest = root;
    if (std::filesystem::is_directory(root)) manifest = root / "manifest.json";
    if (root.empty() || !std::filesystem::exists(manifest))
        throw Error("DatasetMissing", "no dataset manifest at '" + manifest.string() + "'", manifest.string());
    return make_dataset(ingest::load_tables(manifest), manifest.string());
}

Date default_snapshot_date(const graph::GuaranteeNetwork& net) {
    auto span = net.date_span();
    if (!span) throw Error("DatasetMissing", "dataset has no dated records");
    Date best_date = span->begin;
    std::size_t best = 0;
    std::chrono::year_month_day ymd{span->begin};
    for (Date d = make_date(static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()), 1); d < span->end;
         d = add_months(d, 1)) {
        std::size_t active = 0;
        for (const auto& e : net.edges()) active += e.active_at(d);
        if (active > best) {
            best = active;
            best_date = d;
        }
    }
    return best_date;
}

int status_for(const std::string& code) {
    static const std::map<std::string, int> table = {
        {"NotFound", 404},          {"UnknownSession", 404},     {"UnknownJob", 404},
        {"UnknownNode", 404},       {"UnknownCommunity", 404},   {"UnknownEdge", 404},
        {"UnknownEnterprise", 404}, {"MethodNotAllowed", 405},   {"Busy", 503},
        {"NotASpanner", 422},       {"NotAdjacent", 422},        {"NotNeighbours", 422},
        {"SameCommunity", 422},     {"NotACut", 422},            {"DisconnectedResult", 422},
        {"SizeCapExceeded", 422},   {"DegenerateLabels", 422},   {"NoActiveLoan", 422},
        {"EmptySnapshot", 422},     {"ConvergenceFailure", 422}, {"DatasetMissing", 503}};
    auto it = table.find(code);
    if (it != table.end()) return it->second;
    if (code == "InternalError") return 500;
    return 400;
}

// ---- jobs ---------------------------------------------------------------------------------------

std::string_view to_string(JobState s) {
    switch (s) {
        case JobState::queued: return "queued";
        case JobState::running: return "running";
        case JobState::done: return "done";
        case JobState::cancelled: return "cancelled";
        case JobState::failed: return "failed";
    }
    return "unknown";
}

struct JobPool::Job {
    std::string id;
    std::string kind;
    Task task;
    std::atomic<bool> cancel{false};
    std::atomic<double> progress{0.0};
    JobState state = JobState::queued;
    json result;
    json error;
};

namespace {
bool terminal(JobState s) { return s == JobState::done || s == JobState::cancelled || s == JobState::failed; }
}  // namespace

JobPool::JobPool(unsigned workers, std::size_t max_queued) : max_queued_(max_queued) {
    for (unsigned i = 0; i < std::max(1u, workers); ++i) workers_.emplace_back([this] { run(); });
}

JobPool::~JobPool() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
        for (auto& [id, job] : jobs_) job->cancel = true;
    }
    changed_.notify_all();
    for (auto& t : workers_) t.join();
}

std::string JobPool::submit(const std::string& kind, Task task) {
    std::lock_guard lock(mutex_);
    if (queue_.size() >= max_queued_) throw Error("Busy", "job queue is full");
    auto job = std::make_shared<Job>();
    job->id = "job-" + std::to_string(next_id_++);
    job->kind = kind;
    job->task = std::move(task);
    jobs_[job->id] = job;
    queue_.push_back(job);
    changed_.notify_all();
    return job->id;
}

std::shared_ptr<JobPool::Job> JobPool::find(const std::string& id) const {
    auto it = jobs_.find(id);
    if (it == jobs_.end()) throw Error("UnknownJob", "unknown job '" + id + "'", id);
    return it->second;
}

namespace {
JobSnapshot snapshot_of(const auto& job) {
    return {job->id, job->kind, job->state, job->progress.load(), job->result, job->error};
}
}  // namespace

JobSnapshot JobPool::get(const std::string& id) const {
    std::lock_guard lock(mutex_);
    return snapshot_of(find(id));
}

JobSnapshot JobPool::cancel(const std::string& id) {
    std::lock_guard lock(mutex_);
    auto job = find(id);
    if (!terminal(job->state)) {
        job->cancel = true;
        if (job->state == JobState::queued) {
            job->state = JobState::cancelled;
            queue_.erase(std::remove(queue_.begin(), queue_.end(), job), queue_.end());
            changed_.notify_all();
        }
    }
    return snapshot_of(job);
}

JobSnapshot JobPool::wait(const std::string& id) const {
    std::unique_lock lock(mutex_);
    auto job = find(id);
    changed_.wait(lock, [&] { return terminal(job->state); });
    return snapshot_of(job);
}

void JobPool::run() {
    for (;;) {
        std::shared_ptr<Job> job;
        {
            std::unique_lock lock(mutex_);
            changed_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
            if (stopping_) return;
            job = queue_.front();
            queue_.pop_front();
            job->state = JobState::running;
        }
        JobControl ctl;
        ctl.cancel = &job->cancel;
        ctl.progress = [job](double f) {
            double cur = job->progress.load();
            while (f > cur && !job->progress.compare_exchange_weak(cur, f)) {
            }
        };
        json result, error;
        bool failed = false;
        try {
            result = job->task(ctl);
        } catch (const Error& e) {
            failed = true;
            error = {{"code", e.code()}, {"message", e.what()}, {"detail", e.detail()}};
        } catch (const std::exception&) {
            failed = true;
            error = {{"code", "InternalError"}, {"message", "internal error"}, {"detail", ""}};
        }
        {
            std::lock_guard lock(mutex_);
            job->task = nullptr;
            if (failed) {
                job->state = JobState::failed;
                job->error = std::move(error);
            } else {
                job->result = std::move(result);
                if (job->cancel) {
                    job->state = JobState::cancelled;
                } else {
                    job->state = JobState::done;
                    job->progress = 1.0;
                }
            }
        }
        changed_.notify_all();
    }
}

// ---- engine -------------------------------------------------------------------------------------------

namespace {

struct View {
    Date date;
    graph::Snapshot snap;
    graph::SimpleGraph directed;
    graph::SimpleGraph undirected;
    std::vector<graph::FirmFinancials> financials;  // local order
};

std::optional<std::string> query(const Request& r, const std::string& key) {
    auto it = r.query.find(key);
    if (it == r.query.end() || it->second.empty()) return std::nullopt;
    return it->second;
}

long long query_int(const Request& r, const std::string& key, long long fallback) {
    auto v = query(r, key);
    if (!v) return fallback;
    long long out = 0;
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || p != v->data() + v->size())
        throw Error("InvalidArgument", "query parameter '" + key + "' must be an integer", *v);
    return out;
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::size_t i = 0;
    while (i < path.size()) {
        std::size_t j = path.find('/', i);
        if (j == std::string::npos) j = path.size();
        if (j > i) parts.push_back(path.substr(i, j - i));
        i = j + 1;
    }
    return parts;
}

json error_body(const std::string& code, const std::string& message, const std::string& detail) {
    return {{"code", code}, {"message", message}, {"detail", detail}};
}

json job_json(const JobSnapshot& s) {
    json j{{"id", s.id}, {"kind", s.kind}, {"state", to_string(s.state)}, {"progress", s.progress}};
    if (!s.result.is_null()) j["result"] = s.result;
    if (!s.error.is_null()) j["error"] = s.error;
    return j;
}

json stats_json(const std::vector<community::CommunityStats>& stats) {
    json out = json::array();
    for (const auto& s : stats) out.push_back(community::to_json(s));
    return out;
}

json treemap_json(const std::vector<community::TreemapRect>& rects) {
    json out = json::array();
    for (const auto& r : rects)
        out.push_back({{"community", r.label},
                       {"x", r.x},
                       {"y", r.y},
                       {"w", r.w},
                       {"h", r.h},
                       {"default_rate", r.default_rate},
                       {"size", r.size},
                       {"label", r.display}});
    return out;
}

json parse_body(const Request& r) {
    if (r.body.empty()) return json::object();
    try {
        auto j = json::parse(r.body);
        if (!j.is_object()) throw Error("BadRequest", "request body must be a JSON object");
        return j;
    } catch (const json::parse_error&) {
        throw Error("BadRequest", "request body is not valid JSON");
    }
}

contagion::PathCaps caps_from(const Request& r) {
    contagion::PathCaps caps;
    caps.max_len = static_cast<int>(query_int(r, "maxlen", caps.max_len));
    caps.max_paths = query_int(r, "max_paths", caps.max_paths);
    if (caps.max_len < 1) throw Error("InvalidArgument", "maxlen must be at least 1");
    if (caps.max_paths < 1) throw Error("InvalidArgument", "max_paths must be at least 1");
    return caps;
}

}  // namespace

struct Engine::Session {
    std::string id;
    std::shared_ptr<const View> view;
    std::mutex mutex;
    community::Partition initial;
    community::Partition partition;
    contagion::CutSession cuts;
    std::optional<patterns::Motif> motif;
    int revision = 0;
    json log = json::array();
    std::string created;

    Session(std::string sid, std::shared_ptr<const View> v)
        : id(std::move(sid)), view(std::move(v)), cuts(view->directed) {}

    std::string fingerprint() const {
        Fingerprint fp;
        fp.add(partition.fingerprint()).add(cuts.fingerprint()).add(motif ? motif->code_string() : std::string{});
        fp.add(std::int64_t{revision});
        return fp.hex();
    }
};

struct Engine::Impl {
    std::shared_ptr<const Dataset> data;
    std::vector<graph::FirmFinancials> net_financials;
    Date default_date;

    std::mutex cache_mutex;
    std::map<Date, std::shared_ptr<const View>> views;
    std::map<Date, std::shared_ptr<const std::vector<metrics::NodeMetrics>>> metric_cache;
    std::map<Date, std::shared_ptr<const community::Partition>> partitions;
    std::map<std::pair<int, int>, std::shared_ptr<const json>> heatmaps;

    std::shared_mutex sessions_mutex;
    std::map<std::string, std::shared_ptr<Session>> sessions;
    std::uint64_t next_session = 1;

    std::shared_ptr<const View> view(Date d) {
        std::lock_guard lock(cache_mutex);
        auto it = views.find(d);
        if (it != views.end()) return it->second;
        auto v = std::make_shared<View>();
        v->date = d;
        v->snap = graph::snapshot(data->network, d);
        v->directed = graph::simple_view(data->network, v->snap, graph::ViewMode::directed);
        v->undirected = graph::simple_view(data->network, v->snap, graph::ViewMode::undirected);
        v->financials = community::local_financials(v->directed, net_financials);
        if (views.size() > 64) views.clear();
        views[d] = v;
        return v;
    }

    std::shared_ptr<const std::vector<metrics::NodeMetrics>> node_metrics(const std::shared_ptr<const View>& v) {
        {
            std::lock_guard lock(cache_mutex);
            auto it = metric_cache.find(v->date);
            if (it != metric_cache.end()) return it->second;
        }
        auto m = std::make_shared<const std::vector<metrics::NodeMetrics>>(metrics::compute_centralities(v->directed));
        std::lock_guard lock(cache_mutex);
        if (metric_cache.size() > 64) metric_cache.clear();
        metric_cache[v->date] = m;
        return m;
    }

    std::shared_ptr<const community::Partition> detected(const std::shared_ptr<const View>& v) {
        {
            std::lock_guard lock(cache_mutex);
            auto it = partitions.find(v->date);
            if (it != partitions.end()) return it->second;
        }
        auto p = std::make_shared<const community::Partition>(community::detect_communities(v->undirected));
        std::lock_guard lock(cache_mutex);
        if (partitions.size() > 64) partitions.clear();
        partitions[v->date] = p;
        return p;
    }

    Date date_of(const Request& r) {
        auto d = query(r, "date");
        return d ? date_from_string(*d) : default_date;
    }

    std::shared_ptr<Session> session(const std::string& id) {
        std::shared_lock lock(sessions_mutex);
        auto it = sessions.find(id);
        if (it == sessions.end()) throw Error("UnknownSession", "unknown session '" + id + "'", id);
        return it->second;
    }

    // Session from ?session=, if given.
    std::shared_ptr<Session> session_of(const Request& r) {
        auto s = query(r, "session");
        return s ? session(*s) : nullptr;
    }

    json envelope(json body) const {
        if (body.is_object()) {
            body["schema_version"] = kSchemaVersion;
            body["dataset_fingerprint"] = data->network.fingerprint();
        }
        return body;
    }
};

Engine::Engine(std::shared_ptr<const Dataset> data, EngineOptions opts)
    : data_(std::move(data)), impl_(std::make_unique<Impl>()), jobs_(opts.job_workers) {
    if (!data_) throw Error("DatasetMissing", "engine needs a dataset");
    impl_->data = data_;
    impl_->net_financials = graph::firm_financials(data_->network);
    impl_->default_date = default_snapshot_date(data_->network);
}

Engine::~Engine() = default;

Response Engine::handle(const Request& req) {
    auto& I = *impl_;
    const auto& net = data_->network;
    auto ok = [&](json body, int status = 200) { return Response{status, I.envelope(std::move(body))}; };
    try {
        auto parts = split_path(req.path);
        if (parts.size() < 3 || parts[0] != "api" || parts[1] != "v1")
            throw Error("NotFound", "no such endpoint '" + req.path + "'", req.path);
        parts.erase(parts.begin(), parts.begin() + 2);
        const std::string& head = parts[0];
        const std::size_t n = parts.size();
        auto method_is = [&](const char* m) {
            if (req.method != m)
                throw Error("MethodNotAllowed", "method " + req.method + " not allowed on '" + req.path + "'", req.method);
        };

        if (head == "health" && n == 1) {
            method_is("GET");
            return ok({{"status", "ok"},
                       {"version", kVersion},
                       {"fingerprint", net.fingerprint()},
                       {"default_date", to_string(I.default_date)},
                       {"enterprises", net.node_count()},
                       {"guarantees", net.edges().size()}});
        }

        if (head == "stats" && n == 1) {
            method_is("GET");
            return ok({{"stats", ingest::to_json(ingest::overall_stats(data_->tables))},
                       {"rows", ingest::row_counts(data_->tables)}});
        }

        if (head == "sessions") {
            if (n == 1) {
                method_is("POST");
                auto body = parse_body(req);
                Date d = body.contains("date") ? date_from_string(body["date"].get<std::string>()) : I.default_date;
                auto v = I.view(d);
                if (v->directed.size() == 0) throw Error("EmptySnapshot", "no enterprises active on " + to_string(d));
                auto p = I.detected(v);
                std::shared_ptr<Session> s;
                {
                    std::unique_lock lock(I.sessions_mutex);
                    s = std::make_shared<Session>("s-" + std::to_string(I.next_session++), v);
                    I.sessions[s->id] = s;
                }
                s->initial = *p;
                s->partition = *p;
                return ok({{"session", s->id},
                           {"date", to_string(d)},
                           {"revision", s->revision},
                           {"communities", p->community_labels().size()},
                           {"fingerprint", s->fingerprint()}},
                          201);
            }
            auto s = I.session(parts[1]);
            if (n == 2) {
                method_is("GET");
                std::lock_guard lock(s->mutex);
                return ok({{"session", s->id},
                           {"date", to_string(s->view->date)},
                           {"revision", s->revision},
                           {"partition", s->partition.to_json()},
                           {"cuts", [&] {
                                json c = json::array();
                                for (auto [u, v] : s->cuts.cuts())
                                    c.push_back({s->view->directed.id(u), s->view->directed.id(v)});
                                return c;
                            }()},
                           {"motif", s->motif ? patterns::to_json(*s->motif) : json(nullptr)},
                           {"log", s->log},
                           {"fingerprint", s->fingerprint()}});
            }
            if (n == 3 && parts[2] == "edits") {
                method_is("POST");
                auto body = parse_body(req);
                const std::string op = body.value("op", "");
                std::lock_guard lock(s->mutex);
                const auto& v = *s->view;
                json out{{"session", s->id}, {"op", op}};
                if (op == "merge" || op == "reassign" || op == "split") {
                    auto edit = community::edit_from_json(body);
                    auto before = community::community_stats(s->partition, v.undirected, v.financials);
                    s->partition = community::apply_edit(s->partition, v.undirected, edit);
                    auto after = community::community_stats(s->partition, v.undirected, v.financials);
                    json changed = json::array(), removed = json::array();
                    std::map<int, json> old;
                    for (const auto& st : before) old[st.label] = community::to_json(st);
                    for (const auto& st : after) {
                        auto j = community::to_json(st);
                        auto it = old.find(st.label);
                        if (it == old.end() || it->second != j) changed.push_back(j);
                        if (it != old.end()) old.erase(it);
                    }
                    for (const auto& [label, j] : old) removed.push_back(label);
                    out["stats_delta"] = {{"changed", changed}, {"removed", removed}};
                    out["treemap"] = treemap_json(community::treemap_layout(after));
                    out["partition_revision"] = s->partition.revision();
                    out["partition_fingerprint"] = s->partition.fingerprint();
                } else if (op == "cut" || op == "revert") {
                    auto g = body.at("guarantor").get<std::string>();
                    auto b = body.at("borrower").get<std::string>();
                    if (op == "cut") s->cuts.apply_cut(g, b);
                    else s->cuts.revert_cut(g, b);
                    out["cuts"] = s->cuts.cuts().size();
                    out["cut_fingerprint"] = s->cuts.fingerprint();
                    if (body.contains("seed")) {
                        auto r = s->cuts.paths(body["seed"].get<std::string>());
                        out["propagation"] = contagion::to_json(r, v.directed);
                    }
                } else if (op == "motif_edit") {
                    if (body.contains("motif")) s->motif = patterns::motif_from_json(body["motif"]);
                    if (!s->motif) throw Error("InvalidEdit", "session has no motif to edit");
                    if (body.contains("edit")) {
                        auto res = patterns::edit_motif(*s->motif, patterns::motif_edit_from_json(body["edit"]));
                        s->motif = res.motif;
                        out["slot_map"] = res.slot_map;
                    }
                    out["motif"] = patterns::to_json(*s->motif);
                } else {
                    throw Error("InvalidEdit", "unknown edit op '" + op + "'", op);
                }
                ++s->revision;
                s->log.push_back(body);
                out["revision"] = s->revision;
                out["fingerprint"] = s->fingerprint();
                return ok(out);
            }
            throw Error("NotFound", "no such endpoint '" + req.path + "'", req.path);
        }

        if (head == "network" && n == 2 && parts[1] == "snapshot") {
            method_is("GET");
            auto v = I.view(I.date_of(req));
            json nodes = json::array(), edges = json::array();
            for (std::uint32_t i = 0; i < v->directed.size(); ++i)
                nodes.push_back({{"id", v->directed.id(i)}, {"defaulted", v->financials[i].defaulted}});
            for (auto e : v->snap.edges) {
                const auto& ed = net.edges()[e];
                edges.push_back({{"guarantor", ed.guarantor},
                                 {"borrower", ed.borrower},
                                 {"amount", ed.amount},
                                 {"contract_id", ed.contract_id}});
            }
            return ok({{"date", to_string(v->date)}, {"nodes", nodes}, {"edges", edges}});
        }

        if (head == "metrics") {
            method_is("GET");
            auto v = I.view(I.date_of(req));
            auto m = I.node_metrics(v);
            auto kind_name = query(req, "kind");
            std::optional<metrics::MetricKind> kind;
            if (kind_name) {
                kind = metrics::parse_metric(*kind_name);
                if (!kind) throw Error("InvalidArgument", "unknown metric '" + *kind_name + "'", *kind_name);
            }
            if (n == 1) {
                json rows = json::array();
                for (const auto& x : *m) {
                    if (kind) {
                        rows.push_back({{"id", x.id}, {"value", x.value(*kind)}});
                    } else {
                        json row{{"id", x.id}};
                        for (auto k : metrics::kAllMetrics) row[std::string(metrics::to_string(k))] = x.value(k);
                        rows.push_back(row);
                    }
                }
                json body{{"date", to_string(v->date)}, {"metrics", rows}};
                if (kind) body["kind"] = metrics::to_string(*kind);
                return ok(body);
            }
            if (n == 2 && parts[1] == "histogram") {
                std::vector<bool> defaulted;
                for (const auto& f : v->financials) defaulted.push_back(f.defaulted);
                auto h = metrics::default_rate_histogram(*m, defaulted, kind.value_or(metrics::MetricKind::authority),
                                                         static_cast<int>(query_int(req, "bins", 10)));
                json bins = json::array();
                for (const auto& b : h.bins)
                    bins.push_back({{"lower", b.lower},
                                    {"upper", b.upper},
                                    {"nodes", b.node_count},
                                    {"defaults", b.default_count},
                                    {"default_rate", b.default_rate ? json(*b.default_rate) : json(nullptr)}});
                return ok({{"date", to_string(v->date)}, {"kind", metrics::to_string(h.kind)}, {"bins", bins}});
            }
        }

        if ((head == "communities" || head == "treemap") && n == 1) {
            method_is("GET");
            auto s = I.session_of(req);
            std::shared_ptr<const View> v;
            community::Partition p;
            if (s) {
                std::lock_guard lock(s->mutex);
                v = s->view;
                p = s->partition;
            } else {
                v = I.view(I.date_of(req));
                p = *I.detected(v);
            }
            auto stats = community::community_stats(p, v->undirected, v->financials);
            if (head == "treemap")
                return ok({{"date", to_string(v->date)}, {"treemap", treemap_json(community::treemap_layout(stats))}});
            return ok({{"date", to_string(v->date)},
                       {"partition", p.to_json()},
                       {"modularity", community::modularity(v->undirected, p.labels())},
                       {"stats", stats_json(stats)}});
        }

        if (head == "radar" && n == 2) {
            method_is("GET");
            int label = 0;
            auto [ptr, ec] = std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), label);
            if (ec != std::errc{} || ptr != parts[1].data() + parts[1].size())
                throw Error("UnknownCommunity", "unknown community '" + parts[1] + "'", parts[1]);
            auto s = I.session_of(req);
            std::shared_ptr<const View> v;
            community::Partition p;
            if (s) {
                std::lock_guard lock(s->mutex);
                v = s->view;
                p = s->partition;
            } else {
                v = I.view(I.date_of(req));
                p = *I.detected(v);
            }
            auto r = community::radar_profile(label, p, v->undirected, net, v->snap, v->financials);
            return ok({{"date", to_string(v->date)}, {"radar", community::to_json(r)}});
        }

        if (head == "circles" && n == 1) {
            method_is("GET");
            auto v = I.view(I.date_of(req));
            patterns::CircleOptions opts;
            opts.max_cycle_len = static_cast<int>(query_int(req, "maxlen", opts.max_cycle_len));
            auto r = patterns::detect_circles(v->directed, opts);
            return ok({{"date", to_string(v->date)}, {"circles", patterns::to_json(r, v->directed)}});
        }

        if (head == "propagation" || head == "sankey") {
            method_is("GET");
            if (n != 2) throw Error("NotFound", "no such endpoint '" + req.path + "'", req.path);
            auto caps = caps_from(req);
            auto s = I.session_of(req);
            if (s) {
                std::lock_guard lock(s->mutex);
                const auto& g = s->view->directed;
                json body{{"date", to_string(s->view->date)}, {"session", s->id}};
                if (head == "propagation") body["propagation"] = contagion::to_json(s->cuts.paths(parts[1], caps), g);
                else body["sankey"] = contagion::to_json(s->cuts.sankey(parts[1], caps), g);
                return ok(body);
            }
            auto v = I.view(I.date_of(req));
            json body{{"date", to_string(v->date)}};
            if (head == "propagation") {
                auto r = contagion::enumerate_paths(v->directed, parts[1], caps);
                body["propagation"] = contagion::to_json(r, v->directed);
                json cs = json::array();
                for (auto x : contagion::contagion_set(v->directed, parts[1])) cs.push_back(v->directed.id(x));
                body["contagion_set"] = cs;
            } else {
                body["sankey"] = contagion::to_json(contagion::sankey_flow(v->directed, parts[1], caps), v->directed);
            }
            return ok(body);
        }

        if (head == "evolution" && n == 2 && parts[1] == "diff") {
            method_is("GET");
            auto from = query(req, "from"), to = query(req, "to");
            if (!from || !to) throw Error("InvalidArgument", "evolution diff needs 'from' and 'to' dates");
            Date a = date_from_string(*from), b = date_from_string(*to);
            auto d = graph::diff_snapshots(net, a, b);
            auto node_ids = [&](const std::vector<graph::NodeIndex>& xs) {
                json out = json::array();
                for (auto x : xs) out.push_back(net.enterprise_ids()[x]);
                return out;
            };
            auto edge_list = [&](const std::vector<graph::EdgeIndex>& xs) {
                json out = json::array();
                for (auto x : xs) {
                    const auto& e = net.edges()[x];
                    out.push_back({{"guarantor", e.guarantor},
                                   {"borrower", e.borrower},
                                   {"amount", e.amount},
                                   {"contract_id", e.contract_id}});
                }
                return out;
            };
            return ok({{"from", *from},
                       {"to", *to},
                       {"added_nodes", node_ids(d.added_nodes)},
                       {"removed_nodes", node_ids(d.removed_nodes)},
                       {"added_edges", edge_list(d.added_edges)},
                       {"removed_edges", edge_list(d.removed_edges)}});
        }

        if (head == "heatmap" && n == 1) {
            method_is("GET");
            int width = static_cast<int>(query_int(req, "width", 3));
            int stride = static_cast<int>(query_int(req, "stride", 3));
            std::shared_ptr<const json> cached;
            {
                std::lock_guard lock(I.cache_mutex);
                auto it = I.heatmaps.find({width, stride});
                if (it != I.heatmaps.end()) cached = it->second;
            }
            if (!cached) {
                auto plan = risk::build_windows(*net.date_span(), width, stride);
                auto rolled = risk::rolling_predict(net, plan);
                auto grid = metrics::assemble_heatmap(rolled.predictions);
                json cols = json::array(), cells = json::array(), reports = json::array();
                for (auto c : grid.columns) cols.push_back(to_string(c));
                for (const auto& row : grid.cells) {
                    json r = json::array();
                    for (const auto& c : row) r.push_back(c ? json(*c) : json(nullptr));
                    cells.push_back(r);
                }
                for (const auto& rep : rolled.reports) reports.push_back(risk::to_json(rep));
                auto body = std::make_shared<const json>(json{{"rows", grid.rows},
                                                              {"columns", cols},
                                                              {"cells", cells},
                                                              {"reports", reports},
                                                              {"warnings", rolled.warnings}});
                std::lock_guard lock(I.cache_mutex);
                cached = I.heatmaps.emplace(std::make_pair(width, stride), body).first->second;
            }
            return ok(*cached);
        }

        if (head == "jobs") {
            if (n == 1) {
                method_is("POST");
                auto body = parse_body(req);
                const std::string kind = body.value("kind", "");
                auto params = body.value("params", json::object());
                Date d = params.contains("date") ? date_from_string(params["date"].get<std::string>()) : I.default_date;
                std::shared_ptr<Session> s;
                if (params.contains("session")) s = I.session(params["session"].get<std::string>());
                std::shared_ptr<const View> v;
                community::Partition partition;
                contagion::EdgeSet cuts;
                if (s) {
                    std::lock_guard lock(s->mutex);
                    v = s->view;
                    partition = s->partition;
                    cuts = s->cuts.cuts();
                } else if (kind != "rolling_predict") {
                    v = I.view(d);
                }
                JobPool::Task task;
                if (kind == "census") {
                    int k = params.value("k", 4);
                    if (k < 3 || k > 5) throw Error("InvalidArgument", "census k must be between 3 and 5");
                    std::optional<int> community;
                    if (params.contains("community")) community = params["community"].get<int>();
                    if (community && !s) partition = *I.detected(v);
                    if (community && !partition.has(*community))
                        throw Error("UnknownCommunity", "unknown community " + std::to_string(*community));
                    bool rank = params.value("rank", false);
                    task = [v, partition, community, k, rank](const JobControl& ctl) {
                        graph::SimpleGraph g = v->directed;
                        if (community) g = v->directed.induced(partition.members().at(*community));
                        auto census = patterns::motif_census(g, k, {}, ctl);
                        json out = patterns::to_json(census);
                        if (rank && !ctl.cancelled()) {
                            std::vector<patterns::MotifReport> reports;
                            for (const auto& c : census.classes) {
                                if (ctl.cancelled()) break;
                                auto m = patterns::match_motif(v->directed, c.motif);
                                reports.push_back(patterns::motif_report(m, v->financials));
                            }
                            json ranked = json::array();
                            for (const auto& r : patterns::rank_motifs(std::move(reports)))
                                ranked.push_back(patterns::to_json(r));
                            out["ranked"] = ranked;
                        }
                        if (ctl.cancelled()) out["partial"] = true;
                        return out;
                    };
                } else if (kind == "match") {
                    if (!params.contains("motif")) throw Error("InvalidArgument", "match job needs a motif");
                    auto motif = patterns::motif_from_json(params["motif"]);
                    patterns::MatchOptions mo;
                    mo.max_node_sets = params.value("max_node_sets", mo.max_node_sets);
                    task = [v, motif, mo](const JobControl& ctl) {
                        auto m = patterns::match_motif(v->directed, motif, mo, ctl);
                        json out = patterns::to_json(m, v->directed);
                        out["report"] = patterns::to_json(patterns::motif_report(m, v->financials));
                        return out;
                    };
                } else if (kind == "rolling_predict") {
                    int width = params.value("width", 3), stride = params.value("stride", 3);
                    risk::RollingOptions ro;
                    if (params.contains("boost")) ro.params = risk::BoostParams::from_json(params["boost"]);
                    ro.grace_days = params.value("grace_days", 0);
                    auto plan = risk::build_windows(*net.date_span(), width, stride);
                    auto data = data_;
                    task = [data, plan, ro](const JobControl& ctl) {
                        auto r = risk::rolling_predict(data->network, plan, ro, ctl);
                        json out = risk::to_json(r);
                        if (ctl.cancelled()) out["partial"] = true;
                        return out;
                    };
                } else if (kind == "importance") {
                    contagion::PathCaps caps;
                    caps.max_len = params.value("max_len", caps.max_len);
                    caps.max_paths = params.value("max_paths", caps.max_paths);
                    task = [v, cuts, caps](const JobControl& ctl) {
                        auto r = contagion::propagation_importance(v->directed, caps, &cuts, ctl);
                        json out = contagion::to_json(r, v->directed);
                        out["partial"] = r.cancelled;
                        return out;
                    };
                } else {
                    throw Error("InvalidArgument", "unknown job kind '" + kind + "'", kind);
                }
                auto id = jobs_.submit(kind, std::move(task));
                return ok(job_json(jobs_.get(id)), 202);
            }
            if (n == 2) {
                if (req.method == "GET") return ok(job_json(jobs_.get(parts[1])));
                method_is("DELETE");
                return ok(job_json(jobs_.cancel(parts[1])));
            }
        }

        throw Error("NotFound", "no such endpoint '" + req.path + "'", req.path);
    } catch (const Error& e) {
        return {status_for(e.code()), I.envelope(error_body(e.code(), e.what(), e.detail()))};
    } catch (const json::exception& e) {
        return {400, I.envelope(error_body("BadRequest", "malformed request field", e.what()))};
    } catch (const std::exception&) {
        return {500, I.envelope(error_body("InternalError", "internal error", ""))};
    }
}

// ---- HTTP --------------------------------------------------------------------------------------------------

struct HttpServer::Impl {
    Engine& engine;
    httplib::Server server;
    explicit Impl(Engine& e) : engine(e) {}
};

HttpServer::HttpServer(Engine& engine) : impl_(std::make_unique<Impl>(engine)) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        Request r;
        r.method = req.method;
        r.path = req.path;
        for (const auto& [k, v] : req.params) r.query.emplace(k, v);
        r.body = req.body;
        auto out = impl_->engine.handle(r);
        res.status = out.status;
        res.set_content(out.body.dump(), "application/json");
    };
    impl_->server.Get(".*", handler);
    impl_->server.Post(".*", handler);
    impl_->server.Delete(".*", handler);
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        int p = impl_->server.bind_to_any_port(host);
        if (p < 0) throw Error("BindFailure", "cannot bind " + host);
        return p;
    }
    if (!impl_->server.bind_to_port(host, port))
        throw Error("BindFailure", "cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace glens::service
