/*
 * qkdnet: decoy-state BB84 network simulator, C interface.
 *
 * All objects are opaque handles created and released through this header.
 * Functions returning qkdnet_status report failures through the status code;
 * qkdnet_last_error() then holds a message for the calling thread.
 * Strings returned by the library stay valid until the owning handle is freed.
 */
#ifndef QKDNET_H
#define QKDNET_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(QKDNET_BUILDING_LIBRARY)
#    define QKDNET_API __declspec(dllexport)
#  else
#    define QKDNET_API __declspec(dllimport)
#  endif
#else
#  define QKDNET_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qkdnet_status {
  QKDNET_OK = 0,
  QKDNET_E_INVALID_ARGUMENT = 1,
  QKDNET_E_DOMAIN = 2,
  QKDNET_E_PARSE = 3,
  QKDNET_E_IO = 4,
  QKDNET_E_NOT_FOUND = 5,
  QKDNET_E_UNPHYSICAL_STATISTICS = 6,
  QKDNET_E_INSUFFICIENT_DECOY_DATA = 7,
  QKDNET_E_DESYNCHRONIZED_SESSION = 8,
  QKDNET_E_RECONCILIATION_FAILED = 9,
  QKDNET_E_NO_SECURE_KEY = 10,
  QKDNET_E_PORT_BUSY = 11,
  QKDNET_E_PORT_OFFLINE = 12,
  QKDNET_E_SELF_CONNECTION = 13,
  QKDNET_E_NOT_CONNECTED = 14,
  QKDNET_E_UNROUTABLE = 15,
  QKDNET_E_KEY_EXHAUSTED = 16,
  QKDNET_E_KEY_REUSE_REFUSED = 17,
  QKDNET_E_DESYNCHRONIZED_POOLS = 18,
  QKDNET_E_INVALID_INTENSITY_ORDERING = 19,
  QKDNET_E_UNDEFINED_QBER = 20,
  QKDNET_E_INTERNAL = 99
} qkdnet_status;

typedef struct qkdnet_scenario qkdnet_scenario;
typedef struct qkdnet_result qkdnet_result;
typedef struct qkdnet_switch qkdnet_switch;
typedef struct qkdnet_pool qkdnet_pool;

QKDNET_API const char* qkdnet_version(void);
QKDNET_API const char* qkdnet_status_name(qkdnet_status status);
/* Message of the last failed call on this thread; "" when none. */
QKDNET_API const char* qkdnet_last_error(void);

/* ---- decoy-state analysis ---------------------------------------------- */

typedef struct qkdnet_stats {
  double mu, nu;
  double q_mu, e_mu;
  double q_nu, e_nu;
  double y0;
  double n_mu, n_nu, n_0;
} qkdnet_stats;

typedef struct qkdnet_rate_settings {
  double f;       /* error-correction inefficiency */
  double q;       /* sifting times signal occupancy */
  double k_sigma; /* fluctuation width; 0 = asymptotic */
} qkdnet_rate_settings;

typedef struct qkdnet_estimate {
  double q_nu_lower, y0_lower, y0_upper;
  double q1_lower, e1_upper;
  double rate_per_pulse;
  double confidence, confidence_tail;
} qkdnet_estimate;

QKDNET_API qkdnet_rate_settings qkdnet_default_rate_settings(void);
QKDNET_API qkdnet_status qkdnet_key_rate(const qkdnet_stats* stats, const qkdnet_rate_settings* settings,
                                         qkdnet_estimate* out);
QKDNET_API double qkdnet_binary_entropy(double x);
QKDNET_API double qkdnet_confidence_tail(double k_sigma);

/* ---- scenarios and runs ------------------------------------------------ */

QKDNET_API qkdnet_status qkdnet_scenario_load(const char* path, qkdnet_scenario** out);
/* base_dir resolves relative paths in the text; may be NULL for ".". */
QKDNET_API qkdnet_status qkdnet_scenario_parse(const char* yaml, const char* base_dir, qkdnet_scenario** out);
QKDNET_API void qkdnet_scenario_free(qkdnet_scenario* scenario);
QKDNET_API qkdnet_status qkdnet_scenario_set_seed(qkdnet_scenario* scenario, uint64_t seed);
QKDNET_API qkdnet_status qkdnet_scenario_set_rate(qkdnet_scenario* scenario, const qkdnet_rate_settings* settings);
QKDNET_API size_t qkdnet_scenario_link_count(const qkdnet_scenario* scenario);
/* NULL when index is out of range. */
QKDNET_API const char* qkdnet_scenario_link_name(const qkdnet_scenario* scenario, size_t index);

typedef enum qkdnet_section {
  QKDNET_SECTION_TABLE = 0,
  QKDNET_SECTION_SUMMARY = 1,
  QKDNET_SECTION_EVENTS = 2,
  QKDNET_SECTION_BUDGETS = 3,
  QKDNET_SECTION_MESSAGES = 4
} qkdnet_section;

/* link == NULL runs every link of the scenario. */
QKDNET_API qkdnet_status qkdnet_run_link(const qkdnet_scenario* scenario, const char* link, qkdnet_result** out);
QKDNET_API qkdnet_status qkdnet_run_network(const qkdnet_scenario* scenario, qkdnet_result** out);
/* scenario (intensities, run length, rate settings) and rate may each be NULL;
 * rate overrides the scenario's settings; built-in defaults fill the rest. */
QKDNET_API qkdnet_status qkdnet_analyze_file(const char* stats_path, const qkdnet_scenario* scenario,
                                             const qkdnet_rate_settings* rate, qkdnet_result** out);
QKDNET_API qkdnet_status qkdnet_calibrate(const qkdnet_scenario* scenario, qkdnet_result** out);
/* simulate = 0: model predictions only; nonzero: one simulated session per link. */
QKDNET_API qkdnet_status qkdnet_report(const qkdnet_scenario* scenario, int simulate, qkdnet_result** out);

/* "" when the result has no such section. */
QKDNET_API const char* qkdnet_result_text(const qkdnet_result* result, qkdnet_section section);
/* 1 when every scripted assertion of the run held. */
QKDNET_API int qkdnet_result_passed(const qkdnet_result* result);
/* Named attachments, e.g. one classical-channel transcript (JSON lines) per link. */
QKDNET_API size_t qkdnet_result_attachment_count(const qkdnet_result* result);
QKDNET_API const char* qkdnet_result_attachment_name(const qkdnet_result* result, size_t index);
QKDNET_API const char* qkdnet_result_attachment_text(const qkdnet_result* result, size_t index);
QKDNET_API void qkdnet_result_free(qkdnet_result* result);

/* ---- optical switch ---------------------------------------------------- */

typedef enum qkdnet_port_status {
  QKDNET_PORT_IDLE = 0,
  QKDNET_PORT_BUSY = 1,
  QKDNET_PORT_OFFLINE = 2
} qkdnet_port_status;

QKDNET_API qkdnet_status qkdnet_switch_new(int ports, qkdnet_switch** out);
QKDNET_API void qkdnet_switch_free(qkdnet_switch* sw);
QKDNET_API qkdnet_status qkdnet_switch_connect(qkdnet_switch* sw, int a, int b);
QKDNET_API qkdnet_status qkdnet_switch_disconnect(qkdnet_switch* sw, int port);
QKDNET_API qkdnet_status qkdnet_switch_set_offline(qkdnet_switch* sw, int port, int offline);
QKDNET_API qkdnet_status qkdnet_switch_status(const qkdnet_switch* sw, int port, qkdnet_port_status* out);
/* *out = 0 when the port is unpaired. */
QKDNET_API qkdnet_status qkdnet_switch_peer(const qkdnet_switch* sw, int port, int* out);

/* ---- key pools and one-time pad ---------------------------------------- */

QKDNET_API qkdnet_status qkdnet_pool_new(const char* owner, const char* peer, qkdnet_pool** out);
QKDNET_API qkdnet_status qkdnet_pool_load(const char* path, qkdnet_pool** out);
QKDNET_API qkdnet_status qkdnet_pool_save(const qkdnet_pool* pool, const char* path);
QKDNET_API void qkdnet_pool_free(qkdnet_pool* pool);
QKDNET_API qkdnet_status qkdnet_pool_deposit(qkdnet_pool* pool, const uint8_t* key, size_t length,
                                             const char* provenance);
QKDNET_API size_t qkdnet_pool_total(const qkdnet_pool* pool);
/* Bytes still available in the owner's sending lane. */
QKDNET_API size_t qkdnet_pool_send_available(const qkdnet_pool* pool);
QKDNET_API size_t qkdnet_pool_consumed(const qkdnet_pool* pool);

/* cipher_out must hold length bytes. */
QKDNET_API qkdnet_status qkdnet_otp_encrypt(qkdnet_pool* sender, const uint8_t* plaintext, size_t length,
                                            uint8_t* cipher_out, uint64_t* offset_out);
/* plain_out must hold length bytes. */
QKDNET_API qkdnet_status qkdnet_otp_decrypt(qkdnet_pool* receiver, const char* sender, uint64_t offset,
                                            const uint8_t* ciphertext, size_t length, uint8_t* plain_out);

#ifdef __cplusplus
}
#endif

#endif /* QKDNET_H */
