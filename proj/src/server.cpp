#include "trucklens/server.hpp"

#include <atomic>

#include <httplib.h>
#include <json.hpp>

#include "trucklens/error.hpp"

namespace trucklens::service {

namespace {

int status_for(const std::exception& e) {
  if (auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->code()) {
      case ErrorCode::invalid_argument:
      case ErrorCode::parse:
      case ErrorCode::design: return 400;
      case ErrorCode::not_found: return 404;
      case ErrorCode::state: return 409;
      case ErrorCode::io: return 500;
    }
  }
  return 500;
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(nlohmann::ordered_json{{"error", message}}.dump(), "application/json");
}

analysis::Params to_params(const httplib::Request& req) {
  analysis::Params out;
  for (const auto& [k, v] : req.params) {
    if (!out.emplace(k, v).second) throw Error(ErrorCode::invalid_argument, "parameter '" + k + "' given twice");
  }
  return out;
}

const char* content_type(analysis::Resource r) {
  switch (r) {
    case analysis::Resource::kpi:
    case analysis::Resource::heatmap: return "application/json";
    default: return "application/x-ndjson";
  }
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const std::exception& e) {
      send_error(res, status_for(e), e.what());
    }
  };
}

}  // namespace

struct Server::Impl {
  std::shared_ptr<SessionStore> store;
  httplib::Server http;
  std::atomic<bool> stopping{false};
};

Server::Server(std::shared_ptr<SessionStore> store) : impl_(std::make_unique<Impl>()) {
  impl_->store = std::move(store);
  auto& http = impl_->http;
  Impl* self = impl_.get();

  // unmatched routes and methods
  http.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.body.empty()) send_error(res, res.status, "no route for " + req.method + " " + req.path);
  });

  http.Get("/sessions", guarded([self](const httplib::Request&, httplib::Response& res) {
             res.set_content(self->store->list_json(), "application/json");
           }));

  http.Get(R"(/sessions/([^/]+))", guarded([self](const httplib::Request& req, httplib::Response& res) {
             res.set_content(self->store->get(req.matches[1].str())->info_json(), "application/json");
           }));

  http.Get(R"(/sessions/([^/]+)/(frames|events|kpi|heatmap|trajectory))",
           guarded([self](const httplib::Request& req, httplib::Response& res) {
             auto session = self->store->get(req.matches[1].str());
             const auto resource = analysis::parse_resource(req.matches[2].str());
             res.set_content(session->query(resource, to_params(req)), content_type(resource));
           }));

  http.Post("/sessions", guarded([self](const httplib::Request& req, httplib::Response& res) {
              std::string source = req.has_param("source") ? req.get_param_value("source") : std::string{};
              auto session = self->store->create_live(req.body, std::move(source));
              res.status = 201;
              res.set_content(session->info_json(), "application/json");
            }));

  http.Post(R"(/sessions/([^/]+)/records)", guarded([self](const httplib::Request& req, httplib::Response& res) {
              const auto sum = self->store->get(req.matches[1].str())->push_lines(req.body);
              res.set_content(nlohmann::ordered_json{{"accepted", sum.accepted},
                                                     {"dropped_out_of_order", sum.out_of_order},
                                                     {"malformed", sum.malformed}}
                                  .dump(),
                              "application/json");
            }));

  http.Post(R"(/sessions/([^/]+)/finalize)", guarded([self](const httplib::Request& req, httplib::Response& res) {
              auto session = self->store->get(req.matches[1].str());
              session->finalize();
              res.set_content(session->info_json(), "application/json");
            }));

  http.Get(R"(/sessions/([^/]+)/live)", guarded([self](const httplib::Request& req, httplib::Response& res) {
             auto session = self->store->get(req.matches[1].str());
             if (session->state() != SessionState::live)
               throw Error(ErrorCode::state, "session '" + session->id() + "' is not live");
             auto sub = session->subscribe();
             res.set_chunked_content_provider("application/x-ndjson",
                                              [self, sub](std::size_t, httplib::DataSink& sink) {
                                                while (!self->stopping) {
                                                  if (!sink.is_writable()) return false;
                                                  if (auto line = sub->pop(std::chrono::milliseconds(100))) {
                                                    return sink.write(line->data(), line->size());
                                                  }
                                                  if (sub->closed()) {
                                                    sink.done();
                                                    return true;
                                                  }
                                                }
                                                return false;
                                              });
           }));
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::io, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void Server::run() { impl_->http.listen_after_bind(); }

void Server::stop() {
  impl_->stopping = true;
  impl_->http.stop();
}

}  // namespace trucklens::service
