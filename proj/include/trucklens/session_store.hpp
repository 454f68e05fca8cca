#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trucklens/analysis.hpp"
#include "trucklens/config.hpp"
#include "trucklens/ingest.hpp"
#include "trucklens/kinematics.hpp"

namespace trucklens::service {

enum class SessionState { live, finalized };

std::string_view to_string(SessionState state);

/// Bounded frame queue for one live-stream client. When full the oldest
/// entry is dropped so a slow reader never blocks ingestion.
class Subscriber {
 public:
  explicit Subscriber(std::size_t capacity) : capacity_(capacity) {}

  void publish(std::string line);
  void close();
  /// Waits up to `timeout` for the next line. Returns nullopt on timeout or
  /// when closed and drained; check closed() to tell them apart.
  std::optional<std::string> pop(std::chrono::milliseconds timeout);
  bool closed() const;
  std::size_t dropped() const;

 private:
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::string> queue_;
  std::size_t dropped_ = 0;
  bool closed_ = false;
};

struct PushSummary {
  std::size_t accepted = 0;
  std::size_t out_of_order = 0;
  std::size_t malformed = 0;
};

class Session {
 public:
  /// Finalized session over recorded samples of one source.
  static std::shared_ptr<Session> recorded(std::string id, std::string source,
                                           std::span<const ingest::PositionSample> samples, AnalysisConfig config);
  /// Live session fed through push_lines(); frames are produced by the causal
  /// streaming chain until finalize().
  static std::shared_ptr<Session> live(std::string id, std::string source, AnalysisConfig config);

  const std::string& id() const { return id_; }
  const std::string& source() const { return source_; }
  const AnalysisConfig& config() const { return config_; }
  SessionState state() const;
  std::size_t frame_count() const;

  /// {"id","source","state","frame_count","latest"}.
  std::string info_json() const;

  /// Serialized resource view; cached per parameter set once finalized.
  std::string query(analysis::Resource resource, const analysis::Params& params) const;

  /// JSONL records, one per line. Records from a second source id count as
  /// malformed.
  PushSummary push_lines(std::string_view body);
  /// Stops ingestion and replaces the live preview with the batch analysis of
  /// every accepted record.
  void finalize();

  std::shared_ptr<Subscriber> subscribe(std::size_t capacity = 1024);

 private:
  Session(std::string id, std::string source, AnalysisConfig config);

  void on_frame(const kinematics::KinematicFrame& frame);
  std::shared_ptr<const analysis::Analysis> current() const;

  std::string id_;
  std::string source_;
  AnalysisConfig config_;

  mutable std::mutex mutex_;
  SessionState state_ = SessionState::finalized;
  std::shared_ptr<const analysis::Analysis> analysis_;
  std::vector<kinematics::KinematicFrame> live_frames_;
  std::optional<std::string> live_source_;
  std::vector<std::weak_ptr<Subscriber>> subscribers_;
  mutable std::map<std::string, std::string> cache_;

  std::mutex writer_;
  std::unique_ptr<ingest::LiveIngest> ingest_;
  std::unique_ptr<kinematics::StreamingChain> chain_;
  std::size_t malformed_ = 0;
};

/// Sessions loaded from a data root plus live sessions created at runtime.
/// Every *.csv and *.jsonl file in the root is analyzed with
/// `<stem>.config.json` when present, else `config.json`, else defaults.
/// Files holding several sources yield one session per source, id
/// `<stem>.<source>`.
class SessionStore {
 public:
  explicit SessionStore(std::optional<std::filesystem::path> data_root = {}, AnalysisConfig defaults = {});

  /// Files that could not be loaded, with the reason.
  const std::vector<std::string>& load_errors() const { return load_errors_; }

  std::string list_json() const;
  std::shared_ptr<Session> get(std::string_view id) const;
  void add(std::shared_ptr<Session> session);
  /// `config_json` may be empty for defaults.
  std::shared_ptr<Session> create_live(std::string_view config_json, std::string source = {});

 private:
  AnalysisConfig defaults_;
  std::vector<std::string> load_errors_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>, std::less<>> sessions_;
  std::size_t next_live_ = 1;
};

}  // namespace trucklens::service
