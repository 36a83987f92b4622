#pragma once

#include "alina/config.hpp"
#include "alina/frame.hpp"

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace alina
{

struct SequenceInfo
{
    std::string id;
    std::filesystem::path source_dir;
    int frame_count = 0;
    Dims dims;
};

enum class Verdict
{
    accepted,
    flagged,
};

struct ReviewFlag
{
    int frame_index = 0;
    Verdict verdict = Verdict::accepted;
    std::optional<std::string> note;
};

enum class JobState
{
    queued,
    running,
    done,
    failed,
};

struct JobStatus
{
    std::string job_id;
    std::string sequence_id;
    JobState state = JobState::queued;
    int frames_done = 0;
    int frames_total = 0;
    std::optional<std::string> error;
};

std::string to_string(JobState s);
std::string to_string(Verdict v);

// Flat-file state under one output root:
//   <root>/<seq-id>/sequence.json, roi.json, flags.json, overlays/, coords/
class Workspace
{
public:
    explicit Workspace(std::filesystem::path root);

    const std::filesystem::path &root() const noexcept { return root_; }

    SequenceInfo ingest(const std::filesystem::path &dir, std::optional<std::string> id = std::nullopt);
    std::vector<SequenceInfo> sequences() const;
    std::optional<SequenceInfo> sequence(const std::string &id) const;

    std::optional<Roi> roi(const std::string &id) const;
    void set_roi(const std::string &id, const Roi &roi);

    std::map<int, ReviewFlag> flags(const std::string &id) const;
    void set_flag(const std::string &id, const ReviewFlag &flag);

    std::filesystem::path sequence_root(const std::string &id) const { return root_ / id; }

private:
    std::filesystem::path root_;
    mutable std::mutex flags_mutex_;
};

// Single coordinator for pipeline runs: jobs execute one at a time in
// submission order on a worker thread. Job state is mirrored to
// <root>/jobs.json after every transition.
class JobManager
{
public:
    JobManager(Workspace &ws, Config cfg);
    ~JobManager();
    JobManager(const JobManager &) = delete;
    JobManager &operator=(const JobManager &) = delete;

    // Throws Errc::not_found / Errc::invalid_roi before queuing.
    std::string submit(const std::string &sequence_id);
    std::optional<JobStatus> status(const std::string &job_id) const;
    void wait_idle();

private:
    void worker_loop();
    void persist_locked() const;
    void load_persisted();

    Workspace &ws_;
    Config cfg_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::map<std::string, JobStatus> jobs_;
    std::deque<std::string> queue_;
    int next_id_ = 1;
    bool stopping_ = false;
    bool busy_ = false;
    std::thread worker_;
};

// HTTP front end over a Workspace and JobManager.
class Service
{
public:
    Service(std::filesystem::path root, Config cfg);
    ~Service();

    // Blocks. Returns false if the socket could not be bound.
    bool listen(const std::string &host, int port);
    // Binds to an ephemeral port and serves on a background thread; returns
    // the port or -1.
    int start_background(const std::string &host = "127.0.0.1");
    void stop();

    Workspace &workspace() noexcept { return ws_; }
    JobManager &jobs() noexcept { return *jobs_; }

private:
    struct Impl;
    Workspace ws_;
    std::unique_ptr<JobManager> jobs_;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
};

} // namespace alina
