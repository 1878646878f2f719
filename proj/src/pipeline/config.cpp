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

#include "pipeline/config.hpp"

#include "common/error.hpp"
#include "common/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace hyperadapt::pipeline {

namespace {

using evalharness::ScenarioKind;
using metalearn::Method;
using robotsim::Platform;

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected)
{
    throw Error(ErrorKind::config,
                "option '" + std::string(key) + "': invalid value '" + std::string(value) + "' (" + std::string(expected)
                    + ")");
}

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const auto end = comma == std::string_view::npos ? s.size() : comma;
        if (std::string item = trim(s.substr(start, end - start)); !item.empty()) {
            out.push_back(std::move(item));
        }
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

std::uint64_t to_uint(std::string_view key, std::string_view v)
{
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
        bad_value(key, v, "non-negative integer");
    }
    return out;
}

std::size_t to_positive(std::string_view key, std::string_view v)
{
    const std::uint64_t n = to_uint(key, v);
    if (n == 0) {
        bad_value(key, v, "positive integer");
    }
    return n;
}

double to_double(std::string_view key, std::string_view v)
{
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty() || !std::isfinite(out)) {
        bad_value(key, v, "finite number");
    }
    return out;
}

double to_nonnegative(std::string_view key, std::string_view v)
{
    const double d = to_double(key, v);
    if (d < 0.0) {
        bad_value(key, v, "non-negative number");
    }
    return d;
}

double to_positive_double(std::string_view key, std::string_view v)
{
    const double d = to_double(key, v);
    if (d <= 0.0) {
        bad_value(key, v, "positive number");
    }
    return d;
}

bool to_bool(std::string_view key, std::string_view v)
{
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    bad_value(key, v, "true or false");
}

// Shortest text that parses back to the same double.
std::string fmt(double v)
{
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ec == std::errc() ? end : buf);
}

std::string fmt(std::uint64_t v)
{
    return std::to_string(v);
}

std::string fmt(bool v)
{
    return v ? "true" : "false";
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& name)
{
    std::string out;
    for (const T& item : items) {
        if (!out.empty()) {
            out += ",";
        }
        out += name(item);
    }
    return out;
}

template <typename E, typename Parse>
E parse_enum(std::string_view key, std::string_view v, Parse&& parse)
{
    try {
        return parse(v);
    } catch (const Error& e) {
        throw Error(ErrorKind::config, "option '" + std::string(key) + "': " + e.what());
    }
}

struct Option {
    std::string_view key;
    std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::vector<Option>& options()
{
    static const std::vector<Option> table = [] {
        std::vector<Option> t;
        auto add = [&](std::string_view key, auto set, auto get) { t.push_back({key, set, get}); };

        add("scenario",
            [](RunConfig& c, auto k, auto v) {
                c.scenario = parse_enum<ScenarioKind>(k, v, evalharness::parse_scenario);
            },
            [](const RunConfig& c) { return std::string(evalharness::scenario_name(c.scenario)); });
        add("platforms",
            [](RunConfig& c, auto k, auto v) {
                c.platforms.clear();
                if (v == "default") {
                    return;
                }
                if (v == "all") {
                    c.platforms.assign(robotsim::kPlatforms.begin(), robotsim::kPlatforms.end());
                    return;
                }
                for (const auto& name : split_list(v)) {
                    c.platforms.push_back(parse_enum<Platform>(k, name, robotsim::parse_platform));
                }
            },
            [](const RunConfig& c) {
                return c.platforms.empty() ? std::string("default")
                                           : join(c.platforms, [](Platform p) {
                                                 return std::string(robotsim::platform_name(p));
                                             });
            });
        add("k_sweep",
            [](RunConfig& c, auto k, auto v) {
                c.k_sweep.clear();
                for (const auto& item : split_list(v)) {
                    c.k_sweep.push_back(to_uint(k, item));
                }
                if (c.k_sweep.empty()) {
                    bad_value(k, v, "comma-separated counts");
                }
            },
            [](const RunConfig& c) { return join(c.k_sweep, [](std::size_t n) { return std::to_string(n); }); });
        add("seed", [](RunConfig& c, auto k, auto v) { c.seed = to_uint(k, v); },
            [](const RunConfig& c) { return fmt(c.seed); });
        add("robots_per_platform", [](RunConfig& c, auto k, auto v) { c.robots_per_platform = to_positive(k, v); },
            [](const RunConfig& c) { return fmt(std::uint64_t{c.robots_per_platform}); });
        add("test_robots", [](RunConfig& c, auto k, auto v) { c.test_robots = to_positive(k, v); },
            [](const RunConfig& c) { return fmt(std::uint64_t{c.test_robots}); });
        add("checkpoint_every", [](RunConfig& c, auto k, auto v) { c.checkpoint_every = to_uint(k, v); },
            [](const RunConfig& c) { return fmt(std::uint64_t{c.checkpoint_every}); });

        add("canonical_platform",
            [](RunConfig& c, auto k, auto v) {
                c.experiment.canonical_platform = parse_enum<Platform>(k, v, robotsim::parse_platform);
            },
            [](const RunConfig& c) { return std::string(robotsim::platform_name(c.experiment.canonical_platform)); });
        add("pool_size", [](RunConfig& c, auto k, auto v) { c.experiment.data.pool_size = to_positive(k, v); },
            [](const RunConfig& c) { return fmt(std::uint64_t{c.experiment.data.pool_size}); });
        add("goals_per_robot",
            [](RunConfig& c, auto k, auto v) { c.experiment.data.goals_per_robot = to_positive(k, v); },
            [](const RunConfig& c) { return fmt(std::uint64_t{c.experiment.data.goals_per_robot}); });
        add("support_size", [](RunConfig& c, auto k, auto v) { c.experiment.data.support_size = to_positive(k, v); },
            [](const RunConfig& c) { return fmt(std::uint64_t{c.experiment.data.support_size}); });
        add("goal_spread",
            [](RunConfig& c, auto k, auto v) { c.experiment.data.goal_spread = to_positive_double(k, v); },
            [](const RunConfig& c) { return fmt(c.experiment.data.goal_spread); });
        add("ik_damping",
            [](RunConfig& c, auto k, auto v) { c.experiment.data.planner.damping = to_positive_double(k, v); },
            [](const RunConfig& c) { return fmt(c.experiment.data.planner.damping); });
        add("ik_tolerance",
            [](RunConfig& c, auto k, auto v) { c.experiment.data.planner.tolerance = to_positive_double(k, v); },
            [](const RunConfig& c) { return fmt(c.experiment.data.planner.tolerance); });
        add("ik_max_iterations",
            [](RunConfig& c, auto k, auto v) {
                c.experiment.data.planner.max_iterations = static_cast<int>(to_positive(k, v));
            },
            [](const RunConfig& c) {
                return fmt(static_cast<std::uint64_t>(c.experiment.data.planner.max_iterations));
            });

        add("vae_epochs", [](RunConfig& c, auto k, auto v) { c.experiment.vae_fit.epochs = to_positive(k, v); },
            [](const RunConfig& c) { return fmt(std::uint64_t{c.experiment.vae_fit.epochs}); });
        add("vae_batch", [](RunConfig& c, auto k, auto v) { c.experiment.vae_fit.batch_size = to_positive(k, v); },
            [](const RunConfig& c) { return fmt(std::uint64_t{c.experiment.vae_fit.batch_size}); });
        add("vae_lr", [](RunConfig& c, auto k, auto v) { c.experiment.vae_fit.lr = to_positive_double(k, v); },
            [](const RunConfig& c) { return fmt(c.experiment.vae_fit.lr); });
        add("subpolicy_epochs",
            [](RunConfig& c, auto k, auto v) { c.experiment.subpolicy_fit.epochs = to_positive(k, v); },
            [](const RunConfig& c) { return fmt(std::uint64_t{c.experiment.subpolicy_fit.epochs}); });
        add("subpolicy_batch",
            [](RunConfig& c, auto k, auto v) { c.experiment.subpolicy_fit.batch_size = to_positive(k, v); },
            [](const RunConfig& c) { return fmt(std::uint64_t{c.experiment.subpolicy_fit.batch_size}); });
        add("subpolicy_lr",
            [](RunConfig& c, auto k, auto v) { c.experiment.subpolicy_fit.lr = to_positive_double(k, v); },
            [](const RunConfig& c) { return fmt(c.experiment.subpolicy_fit.lr); });

        add("meta_epochs", [](RunConfig& c, auto k, auto v) { c.experiment.meta.epochs = to_positive(k, v); },
            [](const RunConfig& c) { return fmt(std::uint64_t{c.experiment.meta.epochs}); });
        add("meta_lr", [](RunConfig& c, auto k, auto v) { c.experiment.meta.lr = to_positive_double(k, v); },
            [](const RunConfig& c) { return fmt(c.experiment.meta.lr); });
        add("beta", [](RunConfig& c, auto k, auto v) { c.experiment.meta.beta = to_nonnegative(k, v); },
            [](const RunConfig& c) { return fmt(c.experiment.meta.beta); });
        add("lambda_init",
            [](RunConfig& c, auto k, auto v) { c.experiment.meta.lambda_init = to_nonnegative(k, v); },
            [](const RunConfig& c) { return fmt(c.experiment.meta.lambda_init); });
        add("meta_batch", [](RunConfig& c, auto k, auto v) { c.experiment.meta.meta_batch = to_positive(k, v); },
            [](const RunConfig& c) { return fmt(std::uint64_t{c.experiment.meta.meta_batch}); });
        add("samples", [](RunConfig& c, auto k, auto v) { c.experiment.meta.samples = to_positive(k, v); },
            [](const RunConfig& c) { return fmt(std::uint64_t{c.experiment.meta.samples}); });
        add("inner_steps", [](RunConfig& c, auto k, auto v) { c.experiment.meta.inner_steps = to_positive(k, v); },
            [](const RunConfig& c) { return fmt(std::uint64_t{c.experiment.meta.inner_steps}); });
        add("second_order", [](RunConfig& c, auto k, auto v) { c.experiment.meta.second_order = to_bool(k, v); },
            [](const RunConfig& c) { return fmt(c.experiment.meta.second_order); });
        add("freeze_lambda", [](RunConfig& c, auto k, auto v) { c.experiment.meta.freeze_lambda = to_bool(k, v); },
            [](const RunConfig& c) { return fmt(c.experiment.meta.freeze_lambda); });
        add("warm_start", [](RunConfig& c, auto k, auto v) { c.experiment.meta.warm_start = to_bool(k, v); },
            [](const RunConfig& c) { return fmt(c.experiment.meta.warm_start); });
        add("output_gain",
            [](RunConfig& c, auto k, auto v) { c.experiment.meta.output_gain = to_positive_double(k, v); },
            [](const RunConfig& c) { return fmt(c.experiment.meta.output_gain); });

        add("goal_dim",
            [](RunConfig& c, auto k, auto v) {
                const std::uint64_t d = to_uint(k, v);
                if (d != 2 && d != 3) {
                    bad_value(k, v, "2 or 3");
                }
                c.experiment.goal_dim = d;
            },
            [](const RunConfig& c) { return fmt(std::uint64_t{c.experiment.goal_dim}); });
        add("eval_goals", [](RunConfig& c, auto k, auto v) { c.experiment.eval_goals = to_positive(k, v); },
            [](const RunConfig& c) { return fmt(std::uint64_t{c.experiment.eval_goals}); });
        add("selection",
            [](RunConfig& c, auto k, auto v) {
                c.experiment.selection =
                    parse_enum<evalharness::Selection>(k, v, evalharness::parse_selection);
            },
            [](const RunConfig& c) { return std::string(evalharness::selection_name(c.experiment.selection)); });
        add("success_threshold_cm",
            [](RunConfig& c, auto k, auto v) { c.experiment.success_threshold_cm = to_positive_double(k, v); },
            [](const RunConfig& c) { return fmt(c.experiment.success_threshold_cm); });

        std::sort(t.begin(), t.end(), [](const Option& a, const Option& b) { return a.key < b.key; });
        return t;
    }();
    return table;
}

void validate(const RunConfig& c)
{
    const auto& d = c.experiment.data;
    if (d.support_size != c.experiment.dims.support) {
        throw Error(ErrorKind::config, "option 'support_size': the task encoder is built for "
                                           + std::to_string(c.experiment.dims.support) + " support trajectories");
    }
    if (d.goals_per_robot <= d.support_size) {
        throw Error(ErrorKind::config, "option 'goals_per_robot': must exceed support_size");
    }
    if (d.pool_size < d.goals_per_robot) {
        throw Error(ErrorKind::config, "option 'pool_size': must be at least goals_per_robot");
    }
    if (c.methods.empty()) {
        throw Error(ErrorKind::config, "option 'methods': no method selected");
    }
}

} // namespace

void set_option(RunConfig& config, std::string_view key, std::string_view value)
{
    const std::string v = trim(value);
    if (key == "out") {
        config.out = v;
        return;
    }
    if (key == "methods") {
        config.methods.clear();
        if (v == "all") {
            config.methods.assign(metalearn::kMethods, metalearn::kMethods + 4);
            return;
        }
        for (const auto& name : split_list(v)) {
            const Method m = parse_enum<Method>(key, name, metalearn::parse_method);
            if (std::find(config.methods.begin(), config.methods.end(), m) == config.methods.end()) {
                config.methods.push_back(m);
            }
        }
        if (config.methods.empty()) {
            bad_value(key, v, "ours, maml, versa, avi or all");
        }
        return;
    }
    const auto& table = options();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Option& o) { return o.key == key; });
    if (it == table.end()) {
        throw Error(ErrorKind::config, "unknown option '" + std::string(key) + "'");
    }
    it->set(config, key, v);
}

RunConfig parse_config(std::string_view text, std::string_view origin)
{
    RunConfig config;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string content = trim(line);
        if (content.empty()) {
            continue;
        }
        const auto eq = content.find('=');
        const std::string where = std::string(origin) + ":" + std::to_string(number);
        if (eq == std::string::npos) {
            throw Error(ErrorKind::config, where + ": expected 'key = value'");
        }
        try {
            set_option(config, trim(std::string_view(content).substr(0, eq)),
                       std::string_view(content).substr(eq + 1));
        } catch (const Error& e) {
            throw Error(ErrorKind::config, where + ": " + e.what());
        }
    }
    validate(config);
    return config;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io, "cannot read config file " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.string());
}

std::string serialize(const RunConfig& config)
{
    validate(config);
    std::string out;
    for (const Option& o : options()) {
        out += std::string(o.key) + " = " + o.get(config) + "\n";
    }
    return out;
}

std::string config_hash(const RunConfig& config)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(serialize(config))));
    return buf;
}

std::vector<evalharness::ScenarioSpec> variants(const RunConfig& config)
{
    using evalharness::make_scenario;
    std::vector<Platform> platforms = config.platforms;
    if (platforms.empty()) {
        if (config.scenario == ScenarioKind::a) {
            platforms.assign(robotsim::kPlatforms.begin(), robotsim::kPlatforms.end());
        } else {
            platforms = {Platform::baxter};
        }
    }
    std::vector<evalharness::ScenarioSpec> out;
    const auto add = [&](ScenarioKind kind, Platform p, std::size_t k) {
        out.push_back(make_scenario(kind, p, k, config.robots_per_platform, config.test_robots, config.seed));
    };
    switch (config.scenario) {
    case ScenarioKind::b: add(ScenarioKind::b, Platform::yumi, 0); break;
    case ScenarioKind::a:
    case ScenarioKind::c:
        for (const Platform p : platforms) {
            add(config.scenario, p, 0);
        }
        break;
    case ScenarioKind::c_plus_k:
        for (const Platform p : platforms) {
            for (const std::size_t k : config.k_sweep) {
                if (k > config.robots_per_platform) {
                    throw Error(ErrorKind::config, "option 'k_sweep': " + std::to_string(k)
                                                       + " exceeds robots_per_platform");
                }
                add(ScenarioKind::c_plus_k, p, k);
            }
        }
        break;
    }
    return out;
}

std::string scenario_label(const evalharness::ScenarioSpec& spec)
{
    if (spec.kind == ScenarioKind::c_plus_k) {
        return "c+" + std::to_string(spec.injected);
    }
    return std::string(evalharness::scenario_name(spec.kind));
}

std::string variant_tag(const evalharness::ScenarioSpec& spec)
{
    if (spec.kind == ScenarioKind::b) {
        return "b";
    }
    return scenario_label(spec) + "-" + std::string(robotsim::platform_name(spec.platform));
}

} // namespace hyperadapt::pipeline
