#pragma once

#include <memory>
#include <string>

#include "trucklens/session_store.hpp"

namespace trucklens::service {

/// HTTP front end over a SessionStore.
///   GET  /sessions
///   GET  /sessions/{id}
///   GET  /sessions/{id}/frames|events|kpi|heatmap|trajectory
///   POST /sessions                 body: optional config JSON
///   POST /sessions/{id}/records    body: JSONL position records
///   POST /sessions/{id}/finalize
///   GET  /sessions/{id}/live       chunked JSONL frame stream
class Server {
 public:
  explicit Server(std::shared_ptr<SessionStore> store);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace trucklens::service
