/* Stable C interface to the peerfl simulator.
 *
 * Every function returning peerfl_status reports failures through the status
 * code and peerfl_last_error(), never by exception or abort. Strings handed
 * out through char** parameters are owned by the caller and released with
 * peerfl_string_free(). Handles are not thread-safe; distinct handles may be
 * used from distinct threads.
 */
#ifndef PEERFL_PEERFL_H
#define PEERFL_PEERFL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PEERFL_API __declspec(dllexport)
#else
#define PEERFL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  PEERFL_OK = 0,
  PEERFL_ERR_ARGUMENT = 1, /* null handle, bad index, unknown name */
  PEERFL_ERR_CONFIG = 2,   /* parse or validation failure */
  PEERFL_ERR_RUNTIME = 3,  /* failure during the simulation */
  PEERFL_ERR_IO = 4
} peerfl_status;

typedef enum { PEERFL_FORMAT_CSV = 0, PEERFL_FORMAT_JSONL = 1 } peerfl_format;

typedef struct peerfl_config peerfl_config;
typedef struct peerfl_result peerfl_result;

typedef struct {
  size_t devices;
  int rounds;
  double final_mean_accuracy;
  double total_sim_time;
  uint64_t total_bytes;
  uint64_t messages;
  uint64_t drops;
  uint64_t warnings;
  double comm_time;
  double compute_time;
  int stopped_early;
} peerfl_summary;

/* Absent optional fields are NaN (floats) or -1 (peer). */
typedef struct {
  int round;
  uint32_t device;
  const char* event; /* static string: train, receive, send, eval, drop, warn, observe */
  double sim_time;
  double loss;
  double accuracy;
  double adv_accuracy;
  uint64_t bytes;
  int64_t peer;
  double duration;
} peerfl_record;

PEERFL_API const char* peerfl_version(void);

/* Message for the most recent failure on the calling thread. */
PEERFL_API const char* peerfl_last_error(void);

/* off, error, warn, info, debug. */
PEERFL_API peerfl_status peerfl_set_log_level(const char* level);

PEERFL_API void peerfl_string_free(char* s);

PEERFL_API peerfl_status peerfl_config_from_string(const char* yaml, peerfl_config** out);
PEERFL_API peerfl_status peerfl_config_from_file(const char* path, peerfl_config** out);
PEERFL_API peerfl_status peerfl_preset_yaml(const char* name, char** out);
PEERFL_API void peerfl_config_free(peerfl_config* cfg);

PEERFL_API peerfl_status peerfl_config_set_seed(peerfl_config* cfg, int64_t seed);
PEERFL_API peerfl_status peerfl_config_render(const peerfl_config* cfg, char** out);

/* Collects every violation; PEERFL_OK with *n_errors == 0 means runnable.
 * Messages stay valid until the next validate call or peerfl_config_free. */
PEERFL_API peerfl_status peerfl_config_validate(peerfl_config* cfg, size_t* n_errors);
PEERFL_API const char* peerfl_config_error(const peerfl_config* cfg, size_t index);

PEERFL_API peerfl_status peerfl_run(const peerfl_config* cfg, peerfl_result** out);
PEERFL_API void peerfl_result_free(peerfl_result* result);

PEERFL_API peerfl_status peerfl_result_write(const peerfl_result* result, const char* path, peerfl_format format);
PEERFL_API peerfl_status peerfl_result_format(const peerfl_result* result, peerfl_format format, char** out);
PEERFL_API peerfl_status peerfl_result_summary(const peerfl_result* result, peerfl_summary* out);
PEERFL_API peerfl_status peerfl_result_summary_json(const peerfl_result* result, char** out);
PEERFL_API size_t peerfl_result_record_count(const peerfl_result* result);
PEERFL_API peerfl_status peerfl_result_record(const peerfl_result* result, size_t index, peerfl_record* out);

#ifdef __cplusplus
}
#endif

#endif /* PEERFL_PEERFL_H */
