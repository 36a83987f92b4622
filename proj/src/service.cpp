#include "alina/service.hpp"

#include "alina/error.hpp"
#include "alina/image_io.hpp"
#include "alina/pipeline.hpp"

#include <httplib.h>
#include <json.hpp>

#include <fstream>
#include <regex>
#include <sstream>

namespace alina
{

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(JobState s)
{
    switch (s)
    {
    case JobState::queued:
        return "queued";
    case JobState::running:
        return "running";
    case JobState::done:
        return "done";
    case JobState::failed:
        return "failed";
    }
    return "failed";
}

std::string to_string(Verdict v) { return v == Verdict::accepted ? "accepted" : "flagged"; }

namespace
{

std::string slurp(const fs::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::not_found, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Write to a temporary file and rename so readers never see partial files.
void write_atomic(const fs::path &path, const std::string &text)
{
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(Errc::io_failed, "cannot write " + tmp.string());
        out << text;
    }
    fs::rename(tmp, path);
}

bool valid_id(const std::string &id)
{
    static const std::regex re(R"([A-Za-z0-9_][A-Za-z0-9_.-]*)");
    return std::regex_match(id, re);
}

void check_id(const std::string &id)
{
    if (!valid_id(id))
        throw Error(Errc::invalid_argument, "invalid sequence id: " + id);
}

json sequence_json(const SequenceInfo &s)
{
    return {{"id", s.id},
            {"frame_count", s.frame_count},
            {"dims", {{"width", s.dims.width}, {"height", s.dims.height}}},
            {"source_dir", s.source_dir.string()}};
}

json flag_json(const ReviewFlag &f)
{
    json j{{"frame_index", f.frame_index}, {"verdict", to_string(f.verdict)}};
    j["note"] = f.note ? json(*f.note) : json();
    return j;
}

ReviewFlag flag_from_json(const json &j)
{
    if (!j.is_object() || !j.contains("verdict") || !j["verdict"].is_string())
        throw Error(Errc::invalid_argument, "flag needs a \"verdict\" of accepted|flagged");
    ReviewFlag f;
    const auto v = j["verdict"].get<std::string>();
    if (v == "accepted")
        f.verdict = Verdict::accepted;
    else if (v == "flagged")
        f.verdict = Verdict::flagged;
    else
        throw Error(Errc::invalid_argument, "verdict must be accepted or flagged");
    if (j.contains("frame_index"))
    {
        if (!j["frame_index"].is_number_integer())
            throw Error(Errc::invalid_argument, "frame_index must be an integer");
        f.frame_index = j["frame_index"].get<int>();
    }
    if (j.contains("note") && !j["note"].is_null())
    {
        if (!j["note"].is_string())
            throw Error(Errc::invalid_argument, "note must be a string");
        f.note = j["note"].get<std::string>();
    }
    return f;
}

json job_json(const JobStatus &s)
{
    json j{{"job_id", s.job_id},
           {"sequence_id", s.sequence_id},
           {"state", to_string(s.state)},
           {"frames_done", s.frames_done},
           {"frames_total", s.frames_total}};
    j["error"] = s.error ? json(*s.error) : json();
    return j;
}

JobState job_state_from(const std::string &s)
{
    if (s == "queued")
        return JobState::queued;
    if (s == "running")
        return JobState::running;
    if (s == "done")
        return JobState::done;
    return JobState::failed;
}

} // namespace

// ---------------------------------------------------------------- Workspace

Workspace::Workspace(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

SequenceInfo Workspace::ingest(const fs::path &dir, std::optional<std::string> id)
{
    const FrameSequence seq = load_sequence(dir, id);
    check_id(seq.id());
    SequenceInfo info{seq.id(), fs::absolute(dir).lexically_normal(), seq.frame_count(), seq.frame_dims()};
    write_atomic(sequence_root(info.id) / "sequence.json", sequence_json(info).dump(2) + "\n");
    return info;
}

std::optional<SequenceInfo> Workspace::sequence(const std::string &id) const
{
    if (!valid_id(id))
        return std::nullopt;
    const fs::path p = root_ / id / "sequence.json";
    std::error_code ec;
    if (!fs::is_regular_file(p, ec))
        return std::nullopt;
    const json j = json::parse(slurp(p));
    SequenceInfo s;
    s.id = j.at("id").get<std::string>();
    s.source_dir = j.at("source_dir").get<std::string>();
    s.frame_count = j.at("frame_count").get<int>();
    s.dims = {j.at("dims").at("width").get<int>(), j.at("dims").at("height").get<int>()};
    return s;
}

std::vector<SequenceInfo> Workspace::sequences() const
{
    std::vector<SequenceInfo> out;
    std::error_code ec;
    for (const auto &entry : fs::directory_iterator(root_, ec))
    {
        if (!entry.is_directory())
            continue;
        if (auto s = sequence(entry.path().filename().string()))
            out.push_back(*s);
    }
    std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.id < b.id; });
    return out;
}

std::optional<Roi> Workspace::roi(const std::string &id) const
{
    if (!valid_id(id))
        return std::nullopt;
    const fs::path p = root_ / id / "roi.json";
    std::error_code ec;
    if (!fs::is_regular_file(p, ec))
        return std::nullopt;
    return load_roi(p);
}

void Workspace::set_roi(const std::string &id, const Roi &roi)
{
    check_id(id);
    write_atomic(root_ / id / "roi.json", roi_to_json_text(roi) + "\n");
}

std::map<int, ReviewFlag> Workspace::flags(const std::string &id) const
{
    std::lock_guard lock(flags_mutex_);
    std::map<int, ReviewFlag> out;
    if (!valid_id(id))
        return out;
    const fs::path p = root_ / id / "flags.json";
    std::error_code ec;
    if (!fs::is_regular_file(p, ec))
        return out;
    const json j = json::parse(slurp(p));
    for (const auto &f : j)
    {
        const auto flag = flag_from_json(f);
        out[flag.frame_index] = flag;
    }
    return out;
}

void Workspace::set_flag(const std::string &id, const ReviewFlag &flag)
{
    check_id(id);
    auto all = flags(id);
    all[flag.frame_index] = flag;
    json arr = json::array();
    for (const auto &[k, f] : all)
        arr.push_back(flag_json(f));
    std::lock_guard lock(flags_mutex_);
    write_atomic(root_ / id / "flags.json", arr.dump(2) + "\n");
}

// ---------------------------------------------------------------- JobManager

JobManager::JobManager(Workspace &ws, Config cfg) : ws_(ws), cfg_(std::move(cfg))
{
    cfg_.pipeline.output_dir = ws_.root();
    load_persisted();
    worker_ = std::thread([this] { worker_loop(); });
}

JobManager::~JobManager()
{
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    cv_.notify_all();
    if (worker_.joinable())
        worker_.join();
}

void JobManager::load_persisted()
{
    const fs::path p = ws_.root() / "jobs.json";
    std::error_code ec;
    if (!fs::is_regular_file(p, ec))
        return;
    json j;
    try
    {
        j = json::parse(slurp(p));
    }
    catch (const std::exception &)
    {
        return;
    }
    for (const auto &e : j)
    {
        JobStatus s;
        s.job_id = e.value("job_id", "");
        s.sequence_id = e.value("sequence_id", "");
        s.state = job_state_from(e.value("state", "failed"));
        s.frames_done = e.value("frames_done", 0);
        s.frames_total = e.value("frames_total", 0);
        if (e.contains("error") && e["error"].is_string())
            s.error = e["error"].get<std::string>();
        if (s.state == JobState::queued || s.state == JobState::running)
        {
            s.state = JobState::failed;
            s.error = "interrupted by service restart";
        }
        if (s.job_id.rfind("job-", 0) == 0)
            next_id_ = std::max(next_id_, std::atoi(s.job_id.c_str() + 4) + 1);
        jobs_[s.job_id] = s;
    }
    persist_locked();
}

void JobManager::persist_locked() const
{
    json arr = json::array();
    for (const auto &[id, s] : jobs_)
        arr.push_back(job_json(s));
    write_atomic(ws_.root() / "jobs.json", arr.dump(2) + "\n");
}

std::string JobManager::submit(const std::string &sequence_id)
{
    const auto seq = ws_.sequence(sequence_id);
    if (!seq)
        throw Error(Errc::not_found, "unknown sequence: " + sequence_id);
    const auto roi = ws_.roi(sequence_id);
    if (!roi)
        throw Error(Errc::invalid_roi, "missing ROI for sequence " + sequence_id);
    if (auto v = validate_roi(*roi, seq->dims))
        throw Error(Errc::invalid_roi, v->message);

    std::lock_guard lock(mutex_);
    char buf[32];
    std::snprintf(buf, sizeof buf, "job-%06d", next_id_++);
    JobStatus s;
    s.job_id = buf;
    s.sequence_id = sequence_id;
    s.frames_total = seq->frame_count;
    jobs_[s.job_id] = s;
    queue_.push_back(s.job_id);
    persist_locked();
    cv_.notify_all();
    return s.job_id;
}

std::optional<JobStatus> JobManager::status(const std::string &job_id) const
{
    std::lock_guard lock(mutex_);
    auto it = jobs_.find(job_id);
    if (it == jobs_.end())
        return std::nullopt;
    return it->second;
}

void JobManager::wait_idle()
{
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [this] { return queue_.empty() && !busy_; });
}

void JobManager::worker_loop()
{
    for (;;)
    {
        std::string job_id;
        {
            std::unique_lock lock(mutex_);
            cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
            if (stopping_)
                return;
            job_id = queue_.front();
            queue_.pop_front();
            busy_ = true;
            jobs_[job_id].state = JobState::running;
            persist_locked();
        }
        const std::string seq_id = jobs_.at(job_id).sequence_id;
        std::optional<std::string> error;
        try
        {
            const auto info = ws_.sequence(seq_id);
            const auto roi = ws_.roi(seq_id);
            if (!info || !roi)
                throw Error(Errc::not_found, "sequence or ROI disappeared");
            const FrameSequence seq = load_sequence(info->source_dir, seq_id);
            run_sequence(seq, *roi, cfg_.pipeline, [&](int done, int total) {
                std::lock_guard lock(mutex_);
                auto &s = jobs_[job_id];
                s.frames_done = std::max(s.frames_done, done);
                s.frames_total = total;
            });
        }
        catch (const std::exception &e)
        {
            error = e.what();
        }
        {
            std::lock_guard lock(mutex_);
            auto &s = jobs_[job_id];
            s.state = error ? JobState::failed : JobState::done;
            s.error = error;
            busy_ = false;
            persist_locked();
        }
        cv_.notify_all();
    }
}

// ---------------------------------------------------------------- Service

struct Service::Impl
{
    Impl()
    {
        // Exclusive binding: a second server on the same port must fail.
        server.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void *>(&yes), sizeof(yes));
        });
    }

    httplib::Server server;
};

namespace
{

void send_json(httplib::Response &res, int status, const json &body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response &res, int status, const std::string &message)
{
    send_json(res, status, json{{"error", message}});
}

int status_for(const Error &e)
{
    switch (e.code())
    {
    case Errc::not_found:
        return 404;
    case Errc::invalid_roi:
        return 422;
    case Errc::invalid_argument:
    case Errc::out_of_bounds:
        return 400;
    default:
        return 500;
    }
}

int parse_index(const std::string &s)
{
    try
    {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size() || v < 0)
            throw std::invalid_argument(s);
        return v;
    }
    catch (const std::exception &)
    {
        throw Error(Errc::invalid_argument, "frame index must be a non-negative integer");
    }
}

} // namespace

Service::Service(fs::path root, Config cfg)
    : ws_(std::move(root)), jobs_(std::make_unique<JobManager>(ws_, std::move(cfg))), impl_(std::make_unique<Impl>())
{
    auto &srv = impl_->server;

    auto guarded = [](auto handler) {
        return [handler](const httplib::Request &req, httplib::Response &res) {
            try
            {
                handler(req, res);
            }
            catch (const Error &e)
            {
                send_error(res, status_for(e), e.what());
            }
            catch (const json::exception &e)
            {
                send_error(res, 400, std::string("bad JSON: ") + e.what());
            }
            catch (const std::exception &e)
            {
                send_error(res, 500, e.what());
            }
        };
    };

    auto require_sequence = [this](const std::string &id) {
        auto s = ws_.sequence(id);
        if (!s)
            throw Error(Errc::not_found, "unknown sequence: " + id);
        return *s;
    };

    srv.Get("/api/sequences", guarded([this](const httplib::Request &, httplib::Response &res) {
                json arr = json::array();
                for (const auto &s : ws_.sequences())
                    arr.push_back({{"id", s.id}, {"frame_count", s.frame_count}, {"dims", {{"width", s.dims.width}, {"height", s.dims.height}}}});
                send_json(res, 200, arr);
            }));

    srv.Get("/api/sequences/:id/frames/:n",
            guarded([this, require_sequence](const httplib::Request &req, httplib::Response &res) {
                const auto seq = require_sequence(req.path_params.at("id"));
                const int n = parse_index(req.path_params.at("n"));
                const fs::path png = seq.source_dir / frame_file_name(n, "png");
                const fs::path ppm = seq.source_dir / frame_file_name(n, "ppm");
                std::error_code ec;
                if (fs::is_regular_file(png, ec))
                    res.set_content(slurp(png), "image/png");
                else if (fs::is_regular_file(ppm, ec))
                {
                    const auto bytes = encode_png(read_frame(ppm));
                    res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
                }
                else
                    throw Error(Errc::not_found, "frame " + std::to_string(n) + " not found");
            }));

    srv.Get("/api/sequences/:id/roi", guarded([this, require_sequence](const httplib::Request &req, httplib::Response &res) {
                const auto seq = require_sequence(req.path_params.at("id"));
                const auto roi = ws_.roi(seq.id);
                if (!roi)
                    throw Error(Errc::not_found, "no ROI stored for " + seq.id);
                res.set_content(roi_to_json_text(*roi), "application/json");
            }));

    srv.Post("/api/sequences/:id/roi",
             guarded([this, require_sequence](const httplib::Request &req, httplib::Response &res) {
                 const auto seq = require_sequence(req.path_params.at("id"));
                 const Roi roi = roi_from_json_text(req.body);
                 if (auto v = validate_roi(roi, seq.dims))
                 {
                     send_error(res, 422, v->message);
                     return;
                 }
                 ws_.set_roi(seq.id, roi);
                 res.set_content(roi_to_json_text(roi), "application/json");
             }));

    srv.Post("/api/sequences/:id/run",
             guarded([this, require_sequence](const httplib::Request &req, httplib::Response &res) {
                 const auto seq = require_sequence(req.path_params.at("id"));
                 if (!ws_.roi(seq.id))
                 {
                     send_error(res, 409, "missing ROI for sequence " + seq.id);
                     return;
                 }
                 send_json(res, 202, json{{"job_id", jobs_->submit(seq.id)}});
             }));

    srv.Get("/api/jobs/:id", guarded([this](const httplib::Request &req, httplib::Response &res) {
                const auto s = jobs_->status(req.path_params.at("id"));
                if (!s)
                    throw Error(Errc::not_found, "unknown job");
                send_json(res, 200, job_json(*s));
            }));

    srv.Get("/api/sequences/:id/annotations/:n",
            guarded([this, require_sequence](const httplib::Request &req, httplib::Response &res) {
                const auto seq = require_sequence(req.path_params.at("id"));
                const int n = parse_index(req.path_params.at("n"));
                const fs::path p = sequence_outputs(ws_.root(), seq.id).coords(n);
                std::error_code ec;
                if (!fs::is_regular_file(p, ec))
                    throw Error(Errc::not_found, "frame " + std::to_string(n) + " not annotated");
                const auto pixels = read_coords(p);
                json arr = json::array();
                for (const auto &px : pixels)
                    arr.push_back({px.x, px.y});
                send_json(res, 200, json{{"present", !pixels.empty()}, {"pixels", arr}});
            }));

    srv.Get("/api/sequences/:id/annotations/:n/overlay",
            guarded([this, require_sequence](const httplib::Request &req, httplib::Response &res) {
                const auto seq = require_sequence(req.path_params.at("id"));
                const int n = parse_index(req.path_params.at("n"));
                const fs::path p = sequence_outputs(ws_.root(), seq.id).overlay(n);
                std::error_code ec;
                if (!fs::is_regular_file(p, ec))
                    throw Error(Errc::not_found, "no overlay for frame " + std::to_string(n));
                res.set_content(slurp(p), "image/png");
            }));

    srv.Get("/api/sequences/:id/flags/:n",
            guarded([this, require_sequence](const httplib::Request &req, httplib::Response &res) {
                const auto seq = require_sequence(req.path_params.at("id"));
                const int n = parse_index(req.path_params.at("n"));
                const auto all = ws_.flags(seq.id);
                auto it = all.find(n);
                if (it == all.end())
                    throw Error(Errc::not_found, "no flag for frame " + std::to_string(n));
                send_json(res, 200, flag_json(it->second));
            }));

    srv.Put("/api/sequences/:id/flags/:n",
            guarded([this, require_sequence](const httplib::Request &req, httplib::Response &res) {
                const auto seq = require_sequence(req.path_params.at("id"));
                const int n = parse_index(req.path_params.at("n"));
                if (n >= seq.frame_count)
                    throw Error(Errc::not_found, "frame " + std::to_string(n) + " outside the sequence");
                const json body = json::parse(req.body);
                ReviewFlag flag = flag_from_json(body);
                if (body.contains("frame_index") && flag.frame_index != n)
                    throw Error(Errc::invalid_argument, "frame_index does not match the URL");
                flag.frame_index = n;
                ws_.set_flag(seq.id, flag);
                send_json(res, 200, flag_json(flag));
            }));
}

Service::~Service() { stop(); }

bool Service::listen(const std::string &host, int port) { return impl_->server.listen(host, port); }

int Service::start_background(const std::string &host)
{
    const int port = impl_->server.bind_to_any_port(host);
    if (port < 0)
        return -1;
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port;
}

void Service::stop()
{
    if (impl_)
        impl_->server.stop();
    if (thread_.joinable())
        thread_.join();
}

} // namespace alina
