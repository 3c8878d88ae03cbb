#include <pthread.h>
#include <signal.h>
#include <unistd.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "glens/community.hpp"
#include "glens/contagion.hpp"
#include "glens/error.hpp"
#include "glens/financials.hpp"
#include "glens/metrics.hpp"
#include "glens/patterns.hpp"
#include "glens/risk.hpp"
#include "glens/service.hpp"

using namespace glens;
using nlohmann::json;

namespace {

struct Common {
    std::string data;
    std::string output;
    std::string format = "json";
    std::string date;
};

void emit(const Common& c, const std::string& text) {
    if (c.output.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(c.output, std::ios::binary);
    if (!out) throw Error("IoError", "cannot write '" + c.output + "'", c.output);
    out << text;
}

void emit(const Common& c, const json& j, const std::string& csv) {
    emit(c, c.format == "csv" ? csv : j.dump(2) + "\n");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("IoError", "cannot read '" + path + "'", path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::shared_ptr<const service::Dataset> dataset(const Common& c) {
    std::string root = c.data;
    if (root.empty()) {
        if (const char* env = std::getenv("GLENS_DATA")) root = env;
    }
    if (root.empty()) throw Error("DatasetMissing", "no dataset; pass --data or set GLENS_DATA");
    return service::load_dataset(root);
}

struct Loaded {
    std::shared_ptr<const service::Dataset> data;
    Date date;
    graph::Snapshot snap;
    graph::SimpleGraph directed;
    std::vector<graph::FirmFinancials> financials;
};

Loaded load_view(const Common& c) {
    Loaded l;
    l.data = dataset(c);
    const auto& net = l.data->network;
    l.date = c.date.empty() ? service::default_snapshot_date(net) : date_from_string(c.date);
    l.snap = graph::snapshot(net, l.date);
    l.directed = graph::simple_view(net, l.snap, graph::ViewMode::directed);
    l.financials = community::local_financials(l.directed, graph::firm_financials(net));
    return l;
}

void add_common(CLI::App* app, Common& c, bool with_date) {
    app->add_option("--data", c.data, "Dataset directory or manifest (default: $GLENS_DATA)");
    app->add_option("--output,-o", c.output, "Write the result to this file instead of stdout");
    app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    if (with_date) app->add_option("--date", c.date, "Snapshot date YYYY-MM-DD (default: busiest month)");
}

std::string kv_csv(const json& j) {
    std::string out = "key,value\n";
    for (const auto& [k, v] : j.items()) out += k + "," + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Risk analytics for loan-guarantee networks"};
    app.require_subcommand(1);
    Common c;

    std::string manifest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Validate a dataset manifest and report row counts");
    ingest_cmd->add_option("manifest", manifest, "Manifest file or dataset directory")->required();
    add_common(ingest_cmd, c, false);

    std::string config_path;
    auto* generate_cmd = app.add_subcommand("generate", "Generate a synthetic dataset with ground truth");
    generate_cmd->add_option("config", config_path, "Generator config JSON (fields default when absent)")->required();
    add_common(generate_cmd, c, false);

    int grace = 0;
    auto* stats_cmd = app.add_subcommand("stats", "Overall dataset statistics");
    add_common(stats_cmd, c, false);
    stats_cmd->add_option("--grace", grace, "Grace days before a late installment counts as a default");

    auto* centrality_cmd = app.add_subcommand("centrality", "Per-enterprise network metrics");
    add_common(centrality_cmd, c, true);

    auto* communities_cmd = app.add_subcommand("communities", "Detect communities and summarize them");
    add_common(communities_cmd, c, true);

    int k = 4;
    bool rank = false;
    auto* census_cmd = app.add_subcommand("census", "Count k-node motif classes");
    add_common(census_cmd, c, true);
    census_cmd->add_option("-k", k, "Motif size")->check(CLI::Range(3, 5));
    census_cmd->add_flag("--rank", rank, "Match every class found and rank by default risk");

    std::string motif_arg;
    auto* match_cmd = app.add_subcommand("match", "Find every instance of a motif");
    add_common(match_cmd, c, true);
    match_cmd->add_option("--motif", motif_arg, "Motif JSON, inline or a file path")->required();

    int max_cycle = 8;
    auto* circles_cmd = app.add_subcommand("circles", "Detect guarantee circles");
    add_common(circles_cmd, c, true);
    circles_cmd->add_option("--maxlen", max_cycle, "Longest revolving cycle");

    int width = 3, stride = 3;
    std::string params_path;
    auto* predict_cmd = app.add_subcommand("predict", "Rolling-window default prediction");
    add_common(predict_cmd, c, false);
    predict_cmd->add_option("--width", width, "Window width in months");
    predict_cmd->add_option("--stride", stride, "Window stride in months");
    predict_cmd->add_option("--grace", grace, "Grace days before a late installment counts as a default");
    predict_cmd->add_option("--params", params_path, "Boosting parameters JSON file");

    std::string seed;
    contagion::PathCaps caps;
    auto* paths_cmd = app.add_subcommand("paths", "Default propagation paths from a seed enterprise");
    add_common(paths_cmd, c, true);
    paths_cmd->add_option("--seed", seed, "Enterprise id")->required();
    paths_cmd->add_option("--maxlen", caps.max_len, "Longest path in edges");
    paths_cmd->add_option("--max-paths", caps.max_paths, "Path budget");

    int port = 8080;
    std::string host = "127.0.0.1";
    unsigned workers = 2;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API");
    add_common(serve_cmd, c, false);
    serve_cmd->add_option("--port", port, "Listen port");
    serve_cmd->add_option("--host", host, "Listen address");
    serve_cmd->add_option("--workers", workers, "Background job workers");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest_cmd) {
            auto data = service::load_dataset(manifest);
            json j{{"source", data->source},
                   {"fingerprint", data->network.fingerprint()},
                   {"enterprises", data->network.node_count()},
                   {"guarantees", data->network.edges().size()},
                   {"rows", ingest::row_counts(data->tables)}};
            std::string csv = "table,rows\n";
            for (const auto& [t, n] : j["rows"].items()) csv += t + "," + n.dump() + "\n";
            emit(c, j, csv);
        } else if (*generate_cmd) {
            if (c.output.empty()) throw Error("InvalidArgument", "generate needs --output <directory>");
            auto cfg = ingest::config_from_json(json::parse(read_file(config_path)));
            auto synth = ingest::generate_synthetic(cfg);
            auto path = ingest::write_tables(synth.tables, c.output);
            std::ofstream(std::filesystem::path(c.output) / "ground_truth.json") << ingest::to_json(synth.truth).dump(2);
            std::cout << path.string() << "\n";
        } else if (*stats_cmd) {
            auto data = dataset(c);
            auto j = ingest::to_json(ingest::overall_stats(data->tables, grace));
            emit(c, j, kv_csv(j));
        } else if (*centrality_cmd) {
            auto l = load_view(c);
            auto m = metrics::compute_centralities(l.directed);
            json rows = json::array();
            for (const auto& x : m) {
                json row{{"id", x.id}};
                for (auto kind : metrics::kAllMetrics) row[std::string(metrics::to_string(kind))] = x.value(kind);
                rows.push_back(row);
            }
            emit(c, json{{"date", to_string(l.date)}, {"metrics", rows}}, metrics::metrics_to_csv(m));
        } else if (*communities_cmd) {
            auto l = load_view(c);
            auto und = graph::simple_view(l.data->network, l.snap, graph::ViewMode::undirected);
            auto p = community::detect_communities(und);
            auto stats = community::community_stats(p, und, l.financials);
            json js = json::array();
            for (const auto& st : stats) js.push_back(community::to_json(st));
            std::string csv = "community,firms,default_firms,ratio_default_firms,ratio_default_amount,"
                              "spanners,neighbours,total_loan_amount,total_default_amount\n";
            for (const auto& st : stats)
                csv += std::to_string(st.label) + "," + std::to_string(st.firm_count) + "," +
                       std::to_string(st.default_firm_count) + "," + json(st.ratio_default_firms).dump() + "," +
                       (st.ratio_default_amount ? json(*st.ratio_default_amount).dump() : "") + "," +
                       std::to_string(st.spanner_count) + "," + std::to_string(st.neighbour_count) + "," +
                       ingest::format_money(st.total_loan_amount) + "," +
                       ingest::format_money(st.total_default_amount) + "\n";
            emit(c,
                 json{{"date", to_string(l.date)},
                      {"partition", p.to_json()},
                      {"modularity", community::modularity(und, p.labels())},
                      {"stats", js}},
                 csv);
        } else if (*census_cmd) {
            auto l = load_view(c);
            auto census = patterns::motif_census(l.directed, k);
            json j = patterns::to_json(census);
            std::string csv = "motif,count\n";
            for (const auto& cls : census.classes) csv += cls.motif.code_string() + "," + std::to_string(cls.count) + "\n";
            if (rank) {
                std::vector<patterns::MotifReport> reports;
                for (const auto& cls : census.classes)
                    reports.push_back(patterns::motif_report(patterns::match_motif(l.directed, cls.motif), l.financials));
                auto ranked = patterns::rank_motifs(std::move(reports));
                json r = json::array();
                for (const auto& rep : ranked) r.push_back(patterns::to_json(rep));
                j["ranked"] = r;
                csv = patterns::reports_to_csv(ranked);
            }
            j["date"] = to_string(l.date);
            emit(c, j, csv);
        } else if (*match_cmd) {
            auto l = load_view(c);
            std::string text = std::filesystem::exists(motif_arg) ? read_file(motif_arg) : motif_arg;
            auto motif = patterns::motif_from_json(json::parse(text));
            auto m = patterns::match_motif(l.directed, motif);
            auto report = patterns::motif_report(m, l.financials);
            json j = patterns::to_json(m, l.directed);
            j["report"] = patterns::to_json(report);
            j["date"] = to_string(l.date);
            std::string csv = "instance,enterprise\n";
            for (std::size_t i = 0; i < m.node_sets.size(); ++i)
                for (auto v : m.node_sets[i]) csv += std::to_string(i + 1) + "," + l.directed.id(v) + "\n";
            emit(c, j, csv);
        } else if (*circles_cmd) {
            auto l = load_view(c);
            patterns::CircleOptions opts;
            opts.max_cycle_len = max_cycle;
            auto r = patterns::detect_circles(l.directed, opts);
            std::string csv = "circle,kind,enterprise\n";
            std::size_t idx = 0;
            for (const auto* list : {&r.mutual, &r.revolving, &r.star, &r.joint_liability})
                for (const auto& circle : *list) {
                    ++idx;
                    for (auto v : circle.members)
                        csv += std::to_string(idx) + "," + std::string(patterns::to_string(circle.kind)) + "," +
                               l.directed.id(v) + "\n";
                }
            json j = patterns::to_json(r, l.directed);
            j["date"] = to_string(l.date);
            emit(c, j, csv);
        } else if (*predict_cmd) {
            auto data = dataset(c);
            auto span = data->network.date_span();
            if (!span) throw Error("DatasetMissing", "dataset has no dated records");
            risk::RollingOptions opts;
            opts.grace_days = grace;
            if (!params_path.empty()) opts.params = risk::BoostParams::from_json(json::parse(read_file(params_path)));
            auto r = risk::rolling_predict(data->network, risk::build_windows(*span, width, stride), opts);
            for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
            emit(c, risk::to_json(r), risk::predictions_to_csv(r.predictions));
        } else if (*paths_cmd) {
            auto l = load_view(c);
            auto r = contagion::enumerate_paths(l.directed, seed, caps);
            json j = contagion::to_json(r, l.directed);
            j["date"] = to_string(l.date);
            emit(c, j, contagion::paths_to_csv(r, l.directed));
        } else if (*serve_cmd) {
            // Signals are taken by a dedicated thread so every other thread runs with them blocked.
            sigset_t signals;
            sigemptyset(&signals);
            sigaddset(&signals, SIGINT);
            sigaddset(&signals, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &signals, nullptr);
            service::Engine engine(dataset(c), service::EngineOptions{workers});
            service::HttpServer server(engine);
            int bound = server.bind(host, port);
            std::thread waiter([&] {
                int sig = 0;
                sigwait(&signals, &sig);
                server.stop();
            });
            std::cerr << "listening on http://" << host << ":" << bound << "/api/v1\n";
            server.listen();
            kill(getpid(), SIGTERM);
            waiter.join();
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.code() << ": " << e.what();
        if (!e.detail().empty()) std::cerr << " (" << e.detail() << ")";
        std::cerr << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error: BadJson: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
