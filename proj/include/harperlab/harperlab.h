// Copyright 2026 The harperlab Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HARPERLAB_H
#define HARPERLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HL_API __declspec(dllexport)
#else
#define HL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hl_status {
  HL_OK = 0,
  HL_ERR_DOMAIN = 1,
  HL_ERR_REFUSED = 2,
  HL_ERR_NUMERICAL = 3,
  HL_ERR_IO = 4,
  HL_ERR_CONFIG = 5,
  HL_ERR_INVALID_ARGUMENT = 6,
  HL_ERR_INTERNAL = 7
} hl_status;

typedef struct hl_config hl_config;
typedef struct hl_result hl_result;

HL_API const char* hl_version(void);
HL_API const char* hl_status_name(hl_status s);

/* Message of the last failing call on this thread; "" when none. */
HL_API const char* hl_last_error(void);

/* Configuration. Unknown keys and bad values fail with HL_ERR_CONFIG. */
HL_API hl_status hl_config_new(hl_config** out);
HL_API void hl_config_free(hl_config* c);
HL_API hl_status hl_config_set(hl_config* c, const char* key, const char* value);
HL_API hl_status hl_config_parse(hl_config* c, const char* text);
HL_API hl_status hl_config_load(hl_config* c, const char* path);

/* Copies a NUL-terminated string into buf. *needed receives the full size
   including the terminator; a short buffer fails with HL_ERR_INVALID_ARGUMENT. */
HL_API hl_status hl_config_get(const hl_config* c, const char* key, char* buf, size_t cap, size_t* needed);
HL_API hl_status hl_config_serialize(const hl_config* c, char* buf, size_t cap, size_t* needed);
HL_API hl_status hl_config_hash(const hl_config* c, uint64_t* out);

/* Subcommand list, one name per line, and per-subcommand help text. */
HL_API const char* hl_subcommands(void);
HL_API const char* hl_subcommand_help(const char* subcommand);
HL_API const char* hl_config_keys(void);
HL_API const char* hl_config_describe(const char* key);

/* Runs a subcommand; artifacts go to output_dir when it is set. */
HL_API hl_status hl_run(const char* subcommand, const hl_config* c, hl_result** out);
HL_API void hl_result_free(hl_result* r);
HL_API size_t hl_result_artifact_count(const hl_result* r);
HL_API const char* hl_result_artifact_name(const hl_result* r, size_t i);
HL_API const char* hl_result_artifact_data(const hl_result* r, size_t i, size_t* size);
HL_API size_t hl_result_log_count(const hl_result* r);
HL_API const char* hl_result_log_line(const hl_result* r, size_t i);

/* Direct numerics. */
HL_API hl_status hl_theta_function(double re, double im, int n_max, double* out_re, double* out_im);
HL_API hl_status hl_gaussian_lattice_sum(double alpha, double a, double delta, double x0, double y0, double* value,
                                         double* tail_bound);
/* p and q must hold n_terms entries; *count receives the number filled. */
HL_API hl_status hl_convergents(double alpha, int n_terms, int64_t* p, int64_t* q, int* count);

#ifdef __cplusplus
}
#endif

#endif /* HARPERLAB_H */
