#include "trucklens/trucklens.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "trucklens/analysis.hpp"
#include "trucklens/config.hpp"
#include "trucklens/error.hpp"
#include "trucklens/serialize.hpp"
#include "trucklens/server.hpp"
#include "trucklens/session_store.hpp"
#include "trucklens/synthlab.hpp"

struct tl_session {
  std::shared_ptr<trucklens::service::Session> session;
};

struct tl_server {
  std::shared_ptr<trucklens::service::SessionStore> store;
  std::unique_ptr<trucklens::service::Server> server;
};

namespace {

namespace fs = std::filesystem;
using namespace trucklens;

thread_local std::string g_last_error;

tl_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return TL_ERR_INVALID_ARGUMENT;
    case ErrorCode::parse: return TL_ERR_PARSE;
    case ErrorCode::design: return TL_ERR_DESIGN;
    case ErrorCode::io: return TL_ERR_IO;
    case ErrorCode::not_found: return TL_ERR_NOT_FOUND;
    case ErrorCode::state: return TL_ERR_STATE;
  }
  return TL_ERR_INTERNAL;
}

template <typename F>
tl_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return TL_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TL_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return TL_ERR_INTERNAL;
  }
}

void require(const void* p, const char* name) {
  if (!p) throw Error(ErrorCode::invalid_argument, std::string(name) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

AnalysisConfig load_config(const char* path) {
  return path ? parse_analysis_config(read_file(path)) : AnalysisConfig{};
}

std::vector<ingest::PositionSample> load_log(const char* path) {
  if (!fs::exists(path)) throw Error(ErrorCode::io, std::string("input file '") + path + "' does not exist");
  return ingest::parse_log(read_file(path), ingest::format_from_path(path));
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string url_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out += ' ';
    } else if (s[i] == '%' && i + 2 < s.size() && hex_value(s[i + 1]) >= 0 && hex_value(s[i + 2]) >= 0) {
      out += static_cast<char>(hex_value(s[i + 1]) * 16 + hex_value(s[i + 2]));
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

analysis::Params parse_query(const char* query) {
  analysis::Params out;
  if (!query) return out;
  std::string_view q(query);
  if (!q.empty() && q.front() == '?') q.remove_prefix(1);
  while (!q.empty()) {
    auto amp = q.find('&');
    auto item = q.substr(0, amp);
    if (!item.empty()) {
      auto eq = item.find('=');
      std::string key = url_decode(item.substr(0, eq));
      std::string value = eq == std::string_view::npos ? std::string{} : url_decode(item.substr(eq + 1));
      if (!out.emplace(key, value).second)
        throw Error(ErrorCode::invalid_argument, "parameter '" + key + "' given twice");
    }
    if (amp == std::string_view::npos) break;
    q.remove_prefix(amp + 1);
  }
  return out;
}

void write_artifacts(const analysis::Analysis& a, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& art : analysis::default_artifacts()) {
    write_file(dir / art.file_name, analysis::render(a, art.resource, art.params));
  }
}

}  // namespace

extern "C" {

const char* tl_last_error(void) { return g_last_error.c_str(); }

const char* tl_version(void) { return "0.1.0"; }

void tl_string_free(char* s) { std::free(s); }

tl_status tl_analyze(const char* input_path, const char* config_path, const char* out_dir) {
  return guard([&] {
    require(input_path, "input_path");
    require(out_dir, "out_dir");
    const auto config = load_config(config_path);
    const auto samples = load_log(input_path);
    const auto groups = ingest::split_by_source(samples);
    if (groups.size() == 1) {
      write_artifacts(analysis::analyze(groups.front(), config), out_dir);
      return;
    }
    for (const auto& g : groups) {
      write_artifacts(analysis::analyze(g, config), fs::path(out_dir) / g.front().source_id);
    }
  });
}

tl_status tl_static_bench(const char* spec_path, const char* out_csv, uint64_t seed, int has_seed) {
  return guard([&] {
    require(out_csv, "out_csv");
    auto spec = spec_path ? parse_sweep_spec(read_file(spec_path)) : synthlab::SweepSpec{};
    if (has_seed) spec.seed = seed;
    const auto rows = synthlab::run_static_sweep(spec);
    write_file(out_csv, synthlab::sweep_csv(rows));
  });
}

tl_status tl_synth_static(double duration_s, double rate_hz, double noise_mm, uint64_t seed, const char* out_path) {
  return guard([&] {
    require(out_path, "out_path");
    const auto samples = synthlab::gen_static(duration_s, rate_hz, noise_mm, seed);
    write_file(out_path, ingest::write_log(samples, ingest::format_from_path(out_path)));
  });
}

tl_status tl_synth_movement(const char* script_path, double rate_hz, double noise_mm, uint64_t seed,
                            const char* out_path, const char* reference_path) {
  return guard([&] {
    require(out_path, "out_path");
    const auto script =
        script_path ? parse_movement_script(read_file(script_path)) : synthlab::default_movement_script();
    const auto m = synthlab::gen_movement(script, rate_hz, noise_mm, seed);
    write_file(out_path, ingest::write_log(m.samples, ingest::format_from_path(out_path)));
    if (reference_path) write_file(reference_path, serialize::events_jsonl(m.reference));
  });
}

tl_status tl_session_open(const char* input_path, const char* config_path, tl_session** out) {
  return guard([&] {
    require(input_path, "input_path");
    require(out, "out");
    const auto config = load_config(config_path);
    const auto samples = load_log(input_path);
    const auto groups = ingest::split_by_source(samples);
    if (groups.size() != 1) throw Error(ErrorCode::invalid_argument, "session logs must hold a single source");
    const fs::path p(input_path);
    auto s = std::make_unique<tl_session>();
    s->session = service::Session::recorded(p.stem().string(), p.filename().string(), groups.front(), config);
    *out = s.release();
  });
}

tl_status tl_session_frame_count(const tl_session* session, size_t* out) {
  return guard([&] {
    require(session, "session");
    require(out, "out");
    *out = session->session->frame_count();
  });
}

tl_status tl_session_query(const tl_session* session, const char* resource, const char* query, char** out) {
  return guard([&] {
    require(session, "session");
    require(resource, "resource");
    require(out, "out");
    *out = dup_string(session->session->query(analysis::parse_resource(resource), parse_query(query)));
  });
}

void tl_session_free(tl_session* session) { delete session; }

tl_status tl_server_create(const char* data_root, const char* config_path, tl_server** out) {
  return guard([&] {
    require(out, "out");
    const auto config = load_config(config_path);
    std::optional<fs::path> root;
    if (data_root) root = fs::path(data_root);
    auto s = std::make_unique<tl_server>();
    s->store = std::make_shared<service::SessionStore>(root, config);
    s->server = std::make_unique<service::Server>(s->store);
    *out = s.release();
  });
}

tl_status tl_server_load_errors(const tl_server* server, char** out) {
  return guard([&] {
    require(server, "server");
    require(out, "out");
    *out = dup_string(nlohmann::json(server->store->load_errors()).dump());
  });
}

tl_status tl_server_bind(tl_server* server, const char* host, int port, int* bound_port) {
  return guard([&] {
    require(server, "server");
    const int p = server->server->bind(host ? host : "127.0.0.1", port);
    if (bound_port) *bound_port = p;
  });
}

tl_status tl_server_run(tl_server* server) {
  return guard([&] {
    require(server, "server");
    server->server->run();
  });
}

void tl_server_stop(tl_server* server) {
  if (server) server->server->stop();
}

void tl_server_free(tl_server* server) { delete server; }

}  // extern "C"
