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

#include <hyperadapt/hyperadapt.h>

#include "common/error.hpp"
#include "pipeline/stages.hpp"

#include <cstring>
#include <exception>
#include <new>
#include <string>

struct ha_config {
    hyperadapt::pipeline::RunConfig config;
};

namespace {

using hyperadapt::Error;
using hyperadapt::ErrorKind;

thread_local std::string last_error;

ha_status status_of(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::invalid_argument: return HA_ERR_INVALID_ARGUMENT;
    case ErrorKind::shape: return HA_ERR_SHAPE;
    case ErrorKind::non_finite: return HA_ERR_NON_FINITE;
    case ErrorKind::unreachable_goal: return HA_ERR_UNREACHABLE_GOAL;
    case ErrorKind::missing_dependency: return HA_ERR_MISSING_DEPENDENCY;
    case ErrorKind::io: return HA_ERR_IO;
    case ErrorKind::config: return HA_ERR_CONFIG;
    }
    return HA_ERR_INTERNAL;
}

template <typename F>
ha_status guarded(F&& body)
{
    last_error.clear();
    try {
        body();
        return HA_OK;
    } catch (const Error& e) {
        last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return HA_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return HA_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown exception";
        return HA_ERR_INTERNAL;
    }
}

void require(const void* p, const char* what)
{
    if (p == nullptr) {
        throw Error(ErrorKind::invalid_argument, std::string(what) + " is NULL");
    }
}

hyperadapt::pipeline::Logger logger(ha_log_fn log, void* user)
{
    if (log == nullptr) {
        return {};
    }
    return [log, user](const std::string& line) { log(line.c_str(), user); };
}

} // namespace

extern "C" {

const char* ha_version(void)
{
    return "0.1.0";
}

const char* ha_status_name(ha_status status)
{
    switch (status) {
    case HA_OK: return "ok";
    case HA_ERR_INVALID_ARGUMENT: return "invalid argument";
    case HA_ERR_SHAPE: return "shape mismatch";
    case HA_ERR_NON_FINITE: return "non-finite value";
    case HA_ERR_UNREACHABLE_GOAL: return "unreachable goal";
    case HA_ERR_MISSING_DEPENDENCY: return "missing dependency";
    case HA_ERR_IO: return "i/o error";
    case HA_ERR_CONFIG: return "config error";
    case HA_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* ha_last_error(void)
{
    return last_error.c_str();
}

ha_status ha_config_new(ha_config** out)
{
    return guarded([&] {
        require(out, "out");
        *out = new ha_config{};
    });
}

ha_status ha_config_load(const char* path, ha_config** out)
{
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = nullptr;
        *out = new ha_config{hyperadapt::pipeline::load_config(path)};
    });
}

void ha_config_free(ha_config* config)
{
    delete config;
}

ha_status ha_config_set(ha_config* config, const char* key, const char* value)
{
    return guarded([&] {
        require(config, "config");
        require(key, "key");
        require(value, "value");
        hyperadapt::pipeline::set_option(config->config, key, value);
    });
}

ha_status ha_config_hash(const ha_config* config, char* buffer, size_t size)
{
    return guarded([&] {
        require(config, "config");
        require(buffer, "buffer");
        const std::string hash = hyperadapt::pipeline::config_hash(config->config);
        if (size < hash.size() + 1) {
            throw Error(ErrorKind::invalid_argument, "hash buffer needs 17 bytes");
        }
        std::memcpy(buffer, hash.c_str(), hash.size() + 1);
    });
}

ha_status ha_config_serialize(const ha_config* config, char* buffer, size_t size, size_t* needed)
{
    return guarded([&] {
        require(config, "config");
        const std::string text = hyperadapt::pipeline::serialize(config->config);
        if (needed != nullptr) {
            *needed = text.size() + 1;
        }
        if (buffer == nullptr) {
            return;
        }
        if (size < text.size() + 1) {
            throw Error(ErrorKind::invalid_argument, "serialize buffer too small");
        }
        std::memcpy(buffer, text.c_str(), text.size() + 1);
    });
}

ha_status ha_gen_data(const ha_config* config, ha_log_fn log, void* user)
{
    return guarded([&] {
        require(config, "config");
        hyperadapt::pipeline::cmd_gen_data(config->config, logger(log, user));
    });
}

ha_status ha_train(const ha_config* config, const char* stage, ha_log_fn log, void* user)
{
    return guarded([&] {
        require(config, "config");
        require(stage, "stage");
        hyperadapt::pipeline::cmd_train(config->config, stage, logger(log, user));
    });
}

ha_status ha_evaluate(const ha_config* config, ha_log_fn log, void* user)
{
    return guarded([&] {
        require(config, "config");
        hyperadapt::pipeline::cmd_evaluate(config->config, logger(log, user));
    });
}

ha_status ha_export_latents(const ha_config* config, ha_log_fn log, void* user)
{
    return guarded([&] {
        require(config, "config");
        hyperadapt::pipeline::cmd_export_latents(config->config, logger(log, user));
    });
}

ha_status ha_report(const ha_config* config, ha_log_fn log, void* user)
{
    return guarded([&] {
        require(config, "config");
        hyperadapt::pipeline::cmd_report(config->config, logger(log, user));
    });
}

} // extern "C"
