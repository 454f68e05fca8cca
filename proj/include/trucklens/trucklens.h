#ifndef TRUCKLENS_TRUCKLENS_H
#define TRUCKLENS_TRUCKLENS_H

#include <stddef.h>
#include <stdint.h>

#if defined(TRUCKLENS_BUILDING_LIBRARY)
#define TL_API __attribute__((visibility("default")))
#else
#define TL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tl_status {
  TL_OK = 0,
  TL_ERR_INVALID_ARGUMENT = 1,
  TL_ERR_PARSE = 2,
  TL_ERR_DESIGN = 3,
  TL_ERR_IO = 4,
  TL_ERR_NOT_FOUND = 5,
  TL_ERR_STATE = 6,
  TL_ERR_INTERNAL = 7
} tl_status;

/* Message of the last failed call on this thread; "" after success. */
TL_API const char* tl_last_error(void);
TL_API const char* tl_version(void);
/* Frees strings returned through char** out parameters. */
TL_API void tl_string_free(char* s);

/* Runs the full analysis and writes frames.jsonl, events.jsonl, kpi.json,
 * heatmap_{dwell_time,max_speed,max_accel}.json and trajectory.jsonl into
 * out_dir. Logs with several sources get one subdirectory per source.
 * config_path may be NULL for defaults. */
TL_API tl_status tl_analyze(const char* input_path, const char* config_path, const char* out_dir);

/* Static benchmark sweep to CSV. spec_path may be NULL for the default grid;
 * seed overrides the sweep spec seed when has_seed is nonzero. */
TL_API tl_status tl_static_bench(const char* spec_path, const char* out_csv, uint64_t seed, int has_seed);

/* Generators. The log format follows the output extension (.csv/.jsonl). */
TL_API tl_status tl_synth_static(double duration_s, double rate_hz, double noise_mm, uint64_t seed,
                                 const char* out_path);
/* script_path may be NULL for the built-in scenario; reference_path (events
 * JSONL of the scripted ground truth) may be NULL. */
TL_API tl_status tl_synth_movement(const char* script_path, double rate_hz, double noise_mm, uint64_t seed,
                                   const char* out_path, const char* reference_path);

typedef struct tl_session tl_session;

/* Finalized session over a single-source log file. */
TL_API tl_status tl_session_open(const char* input_path, const char* config_path, tl_session** out);
TL_API tl_status tl_session_frame_count(const tl_session* session, size_t* out);
/* resource: frames|events|kpi|heatmap|trajectory; query: "from=0&to=10" or
 * NULL. Same bytes as the HTTP endpoint with the same parameters. */
TL_API tl_status tl_session_query(const tl_session* session, const char* resource, const char* query, char** out);
TL_API void tl_session_free(tl_session* session);

typedef struct tl_server tl_server;

/* data_root and config_path may be NULL. */
TL_API tl_status tl_server_create(const char* data_root, const char* config_path, tl_server** out);
/* JSON array of files under the data root that failed to load. */
TL_API tl_status tl_server_load_errors(const tl_server* server, char** out);
/* port 0 picks a free port, reported through bound_port (may be NULL). */
TL_API tl_status tl_server_bind(tl_server* server, const char* host, int port, int* bound_port);
/* Blocks until tl_server_stop is called from another thread. */
TL_API tl_status tl_server_run(tl_server* server);
TL_API void tl_server_stop(tl_server* server);
TL_API void tl_server_free(tl_server* server);

#ifdef __cplusplus
}
#endif

#endif
