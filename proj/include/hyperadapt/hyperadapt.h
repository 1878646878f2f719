// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#ifndef HYPERADAPT_HYPERADAPT_H
#define HYPERADAPT_HYPERADAPT_H

#include <stddef.h>

#if defined(_WIN32)
#define HA_API __declspec(dllexport)
#else
#define HA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ha_status {
    HA_OK = 0,
    HA_ERR_INVALID_ARGUMENT = 1,
    HA_ERR_SHAPE = 2,
    HA_ERR_NON_FINITE = 3,
    HA_ERR_UNREACHABLE_GOAL = 4,
    HA_ERR_MISSING_DEPENDENCY = 5,
    HA_ERR_IO = 6,
    HA_ERR_CONFIG = 7,
    HA_ERR_INTERNAL = 8
} ha_status;

/* Run configuration. Every option of the config file format can be set by
   key; "out" and "methods" are accepted as well. */
typedef struct ha_config ha_config;

/* Receives one progress line (no trailing newline). */
typedef void (*ha_log_fn)(const char* line, void* user);

HA_API const char* ha_version(void);
HA_API const char* ha_status_name(ha_status status);

/* Message of the last failed call on this thread, "" if none. Valid until
   the next call into the library from the same thread. */
HA_API const char* ha_last_error(void);

/* Defaults. */
HA_API ha_status ha_config_new(ha_config** out);
/* Parses a "key = value" file. */
HA_API ha_status ha_config_load(const char* path, ha_config** out);
HA_API void ha_config_free(ha_config* config);
HA_API ha_status ha_config_set(ha_config* config, const char* key, const char* value);

/* Writes the 16 hex digits and a NUL; `size` must be at least 17. */
HA_API ha_status ha_config_hash(const ha_config* config, char* buffer, size_t size);

/* Copies the serialized config into `buffer` if it fits and stores the
   required size including the NUL in `needed` (may be NULL). Pass a NULL
   buffer to query the size. */
HA_API ha_status ha_config_serialize(const ha_config* config, char* buffer, size_t size, size_t* needed);

/* Pipeline stages; `log` may be NULL. Files go under the config's "out"
   directory. */
HA_API ha_status ha_gen_data(const ha_config* config, ha_log_fn log, void* user);
/* stage: "vae", "subpolicy", "meta:<method>", "meta" or "all". */
HA_API ha_status ha_train(const ha_config* config, const char* stage, ha_log_fn log, void* user);
HA_API ha_status ha_evaluate(const ha_config* config, ha_log_fn log, void* user);
HA_API ha_status ha_export_latents(const ha_config* config, ha_log_fn log, void* user);
HA_API ha_status ha_report(const ha_config* config, ha_log_fn log, void* user);

#ifdef __cplusplus
}
#endif

#endif
