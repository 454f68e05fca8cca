#include "trucklens/session_store.hpp"

#include <algorithm>

#include <json.hpp>

#include "trucklens/error.hpp"
#include "trucklens/serialize.hpp"

namespace trucklens::service {

using nlohmann::ordered_json;

std::string_view to_string(SessionState state) { return state == SessionState::live ? "live" : "finalized"; }

void Subscriber::publish(std::string line) {
  {
    std::lock_guard lock(mutex_);
    if (closed_) return;
    if (queue_.size() >= capacity_) {
      queue_.pop_front();
      ++dropped_;
    }
    queue_.push_back(std::move(line));
  }
  cv_.notify_one();
}

void Subscriber::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

std::optional<std::string> Subscriber::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
  if (queue_.empty()) return std::nullopt;
  std::string out = std::move(queue_.front());
  queue_.pop_front();
  return out;
}

bool Subscriber::closed() const {
  std::lock_guard lock(mutex_);
  return closed_ && queue_.empty();
}

std::size_t Subscriber::dropped() const {
  std::lock_guard lock(mutex_);
  return dropped_;
}

Session::Session(std::string id, std::string source, AnalysisConfig config)
    : id_(std::move(id)), source_(std::move(source)), config_(std::move(config)) {}

std::shared_ptr<Session> Session::recorded(std::string id, std::string source,
                                           std::span<const ingest::PositionSample> samples, AnalysisConfig config) {
  std::shared_ptr<Session> s(new Session(std::move(id), std::move(source), std::move(config)));
  s->analysis_ = std::make_shared<const analysis::Analysis>(analysis::analyze(samples, s->config_));
  s->state_ = SessionState::finalized;
  return s;
}

std::shared_ptr<Session> Session::live(std::string id, std::string source, AnalysisConfig config) {
  kinematics::validate(config.chain);
  events::validate(config.limits);
  std::shared_ptr<Session> s(new Session(std::move(id), std::move(source), std::move(config)));
  s->state_ = SessionState::live;
  Session* raw = s.get();
  s->chain_ = std::make_unique<kinematics::StreamingChain>(
      s->config_.chain, [raw](const kinematics::KinematicFrame& f) { raw->on_frame(f); });
  s->ingest_ = std::make_unique<ingest::LiveIngest>([raw](const ingest::PositionSample& p) { raw->chain_->push(p); });
  return s;
}

SessionState Session::state() const {
  std::lock_guard lock(mutex_);
  return state_;
}

std::size_t Session::frame_count() const {
  std::lock_guard lock(mutex_);
  return state_ == SessionState::live ? live_frames_.size() : analysis_->frames.size();
}

std::string Session::info_json() const {
  std::lock_guard lock(mutex_);
  const auto& frames = state_ == SessionState::live ? live_frames_ : analysis_->frames;
  ordered_json j = {{"id", id_}, {"source", source_}, {"state", to_string(state_)}, {"frame_count", frames.size()}};
  j["latest"] = frames.empty() ? ordered_json(nullptr) : ordered_json::parse(serialize::frame_json(frames.back()));
  return j.dump();
}

std::shared_ptr<const analysis::Analysis> Session::current() const {
  std::lock_guard lock(mutex_);
  if (state_ == SessionState::finalized) return analysis_;
  return std::make_shared<const analysis::Analysis>(analysis::from_frames(live_frames_, config_));
}

std::string Session::query(analysis::Resource resource, const analysis::Params& params) const {
  std::string key = std::to_string(static_cast<int>(resource));
  for (const auto& [k, v] : params) key += "\n" + k + "=" + v;
  bool finalized = false;
  {
    std::lock_guard lock(mutex_);
    finalized = state_ == SessionState::finalized;
    if (finalized) {
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
  }
  auto a = current();
  std::string out = analysis::render(*a, resource, params);
  if (finalized) {
    std::lock_guard lock(mutex_);
    cache_.emplace(key, out);
  }
  return out;
}

PushSummary Session::push_lines(std::string_view body) {
  std::lock_guard writer(writer_);
  if (state() != SessionState::live) throw Error(ErrorCode::state, "session '" + id_ + "' is finalized");
  PushSummary sum;
  std::size_t line_no = 0;
  while (!body.empty()) {
    auto nl = body.find('\n');
    std::string_view line = body.substr(0, nl);
    body = nl == std::string_view::npos ? std::string_view{} : body.substr(nl + 1);
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    ingest::PositionSample sample;
    try {
      sample = ingest::parse_record(line, line_no);
    } catch (const ParseError&) {
      ++sum.malformed;
      continue;
    }
    if (!live_source_) live_source_ = sample.source_id;
    if (sample.source_id != *live_source_) {
      ++sum.malformed;
      continue;
    }
    switch (ingest_->push(std::move(sample))) {
      case ingest::RecordStatus::accepted: ++sum.accepted; break;
      case ingest::RecordStatus::out_of_order: ++sum.out_of_order; break;
      case ingest::RecordStatus::malformed: ++sum.malformed; break;
    }
  }
  malformed_ += sum.malformed;
  return sum;
}

void Session::finalize() {
  std::lock_guard writer(writer_);
  if (state() != SessionState::live) throw Error(ErrorCode::state, "session '" + id_ + "' is already finalized");
  ingest_->finalize();
  chain_->finalize();
  const auto samples = ingest_->snapshot();
  std::shared_ptr<const analysis::Analysis> result;
  if (samples.size() >= 2) {
    result = std::make_shared<const analysis::Analysis>(analysis::analyze(samples, config_));
  } else {
    result = std::make_shared<const analysis::Analysis>(analysis::from_frames({}, config_));
  }
  std::vector<std::weak_ptr<Subscriber>> subs;
  {
    std::lock_guard lock(mutex_);
    analysis_ = std::move(result);
    state_ = SessionState::finalized;
    live_frames_.clear();
    live_frames_.shrink_to_fit();
    subs.swap(subscribers_);
  }
  for (auto& w : subs)
    if (auto s = w.lock()) s->close();
}

void Session::on_frame(const kinematics::KinematicFrame& frame) {
  std::string line = serialize::frame_json(frame) + "\n";
  std::lock_guard lock(mutex_);
  live_frames_.push_back(frame);
  std::erase_if(subscribers_, [](auto& w) { return w.expired(); });
  for (auto& w : subscribers_)
    if (auto s = w.lock()) s->publish(line);
}

std::shared_ptr<Subscriber> Session::subscribe(std::size_t capacity) {
  auto sub = std::make_shared<Subscriber>(capacity);
  std::lock_guard lock(mutex_);
  if (state_ == SessionState::finalized) sub->close();
  else subscribers_.push_back(sub);
  return sub;
}

SessionStore::SessionStore(std::optional<std::filesystem::path> data_root, AnalysisConfig defaults)
    : defaults_(std::move(defaults)) {
  if (!data_root) return;
  namespace fs = std::filesystem;
  if (!fs::is_directory(*data_root)) throw Error(ErrorCode::io, "data root '" + data_root->string() + "' is not a directory");

  AnalysisConfig root_config = defaults_;
  if (fs::exists(*data_root / "config.json")) root_config = parse_analysis_config(read_file(*data_root / "config.json"));

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(*data_root)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".csv" || ext == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  for (const auto& path : files) {
    try {
      AnalysisConfig config = root_config;
      const auto own = path.parent_path() / (path.stem().string() + ".config.json");
      if (fs::exists(own)) config = parse_analysis_config(read_file(own));
      const auto samples = ingest::parse_log(read_file(path), ingest::format_from_path(path.string()));
      const auto groups = ingest::split_by_source(samples);
      for (const auto& g : groups) {
        std::string id = path.stem().string();
        std::string source = path.filename().string();
        if (groups.size() > 1) {
          id += "." + g.front().source_id;
          source += "#" + g.front().source_id;
        }
        if (sessions_.count(id)) throw Error(ErrorCode::invalid_argument, "duplicate session id '" + id + "'");
        sessions_.emplace(id, Session::recorded(id, source, g, config));
      }
    } catch (const std::exception& e) {
      load_errors_.push_back(path.filename().string() + ": " + e.what());
    }
  }
}

std::string SessionStore::list_json() const {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, s] : sessions_) all.push_back(s);
  }
  ordered_json arr = ordered_json::array();
  for (const auto& s : all) arr.push_back(ordered_json::parse(s->info_json()));
  return arr.dump();
}

std::shared_ptr<Session> SessionStore::get(std::string_view id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::not_found, "no session '" + std::string(id) + "'");
  return it->second;
}

void SessionStore::add(std::shared_ptr<Session> session) {
  std::lock_guard lock(mutex_);
  if (!sessions_.emplace(session->id(), session).second)
    throw Error(ErrorCode::invalid_argument, "duplicate session id '" + session->id() + "'");
}

std::shared_ptr<Session> SessionStore::create_live(std::string_view config_json, std::string source) {
  AnalysisConfig config = config_json.find_first_not_of(" \t\r\n") == std::string_view::npos
                              ? defaults_
                              : parse_analysis_config(config_json);
  std::lock_guard lock(mutex_);
  std::string id;
  do {
    id = "live-" + std::to_string(next_live_++);
  } while (sessions_.count(id));
  auto s = Session::live(id, source.empty() ? "live" : std::move(source), std::move(config));
  sessions_.emplace(id, s);
  return s;
}

}  // namespace trucklens::service
