#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "glens/graph.hpp"
#include "glens/ingest.hpp"
#include "glens/job.hpp"
#include "json.hpp"

namespace glens::service {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

struct Dataset {
    ingest::TableSet tables;
    graph::GuaranteeNetwork network;
    std::string source;
};

// `root` is a directory holding manifest.json or the manifest itself. Errors: DatasetMissing
// plus the ingest errors.
std::shared_ptr<const Dataset> load_dataset(const std::filesystem::path& root);
std::shared_ptr<const Dataset> make_dataset(ingest::TableSet tables, std::string source);

struct Request {
    std::string method;  // GET, POST, DELETE
    std::string path;    // e.g. /api/v1/health
    std::map<std::string, std::string> query;
    std::string body;
};

struct Response {
    int status = 200;
    nlohmann::json body;
};

// First-of-month date with the most active guarantees; the default snapshot everywhere.
// Errors: DatasetMissing when the network has no dated records.
Date default_snapshot_date(const graph::GuaranteeNetwork& net);

// Maps an error code to its HTTP status.
int status_for(const std::string& code);

enum class JobState { queued, running, done, cancelled, failed };
std::string_view to_string(JobState s);

struct JobSnapshot {
    std::string id;
    std::string kind;
    JobState state = JobState::queued;
    double progress = 0.0;
    nlohmann::json result;  // null until finished
    nlohmann::json error;   // {code, message, detail} when failed
};

// Fixed set of worker threads draining a bounded FIFO queue.
class JobPool {
public:
    using Task = std::function<nlohmann::json(const JobControl&)>;

    explicit JobPool(unsigned workers = 2, std::size_t max_queued = 256);
    ~JobPool();
    JobPool(const JobPool&) = delete;
    JobPool& operator=(const JobPool&) = delete;

    // Errors: Busy when the queue is full.
    std::string submit(const std::string& kind, Task task);
    // Errors: UnknownJob.
    JobSnapshot get(const std::string& id) const;
    JobSnapshot cancel(const std::string& id);
    // Blocks until the job reaches a terminal state.
    JobSnapshot wait(const std::string& id) const;

private:
    struct Job;
    void run();
    std::shared_ptr<Job> find(const std::string& id) const;

    mutable std::mutex mutex_;
    mutable std::condition_variable changed_;
    std::map<std::string, std::shared_ptr<Job>> jobs_;
    std::deque<std::shared_ptr<Job>> queue_;
    std::vector<std::thread> workers_;
    std::size_t max_queued_;
    std::uint64_t next_id_ = 1;
    bool stopping_ = false;
};

struct EngineOptions {
    unsigned job_workers = 2;
};

// Request router for the /api/v1 surface; safe for concurrent calls.
class Engine {
public:
    explicit Engine(std::shared_ptr<const Dataset> data, EngineOptions opts = {});
    ~Engine();

    Response handle(const Request& req);
    const Dataset& dataset() const { return *data_; }
    JobPool& jobs() { return jobs_; }

private:
    struct Session;
    struct Impl;
    std::shared_ptr<const Dataset> data_;
    std::unique_ptr<Impl> impl_;
    JobPool jobs_;
};

// HTTP/1.1 front end over an Engine.
class HttpServer {
public:
    explicit HttpServer(Engine& engine);
    ~HttpServer();

    // Errors: BindFailure.
    int bind(const std::string& host, int port);  // port 0 picks a free one; returns the port
    void listen();                                // blocks until stop()
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace glens::service
