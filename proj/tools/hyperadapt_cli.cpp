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

// Command-line front end; talks to the library only through the C API.

#include <hyperadapt/hyperadapt.h>

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <optional>
#include <string>

namespace {

struct Flags {
    std::string config;
    std::optional<unsigned long long> seed;
    std::string scenario;
    std::string method;
    bool first_order = false;
    std::string out;
    std::string stage = "all";
};

void add_common(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--config", f.config, "Config file (key = value lines)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_option("--scenario", f.scenario, "Scenario")->check(CLI::IsMember({"a", "b", "c", "c+k"}));
    cmd->add_option("--method", f.method, "Meta-learner")
        ->check(CLI::IsMember({"ours", "maml", "versa", "avi", "all"}));
    cmd->add_flag("--first-order", f.first_order, "Drop second-order terms of the meta-gradient");
    cmd->add_option("--out", f.out, "Output directory");
}

void print_line(const char* line, void*)
{
    std::fprintf(stdout, "%s\n", line);
    std::fflush(stdout);
}

int fail(ha_status status, const char* fallback_stage)
{
    const std::string msg = ha_last_error();
    if (!msg.empty() && msg.front() == '[') {
        std::fprintf(stderr, "hyperadapt: %s\n", msg.c_str());
    } else {
        std::fprintf(stderr, "hyperadapt: [%s] %s: %s\n", fallback_stage, ha_status_name(status), msg.c_str());
    }
    return static_cast<int>(status);
}

using ConfigPtr = std::unique_ptr<ha_config, decltype(&ha_config_free)>;

// Config file first, then the flags on top of it.
ha_status build_config(const Flags& f, ConfigPtr& out)
{
    ha_config* raw = nullptr;
    ha_status s = f.config.empty() ? ha_config_new(&raw) : ha_config_load(f.config.c_str(), &raw);
    if (s != HA_OK) {
        return s;
    }
    out.reset(raw);
    const auto set = [&](const char* key, const std::string& value) {
        if (s == HA_OK) {
            s = ha_config_set(raw, key, value.c_str());
        }
    };
    if (f.seed) {
        set("seed", std::to_string(*f.seed));
    }
    if (!f.scenario.empty()) {
        set("scenario", f.scenario);
    }
    if (!f.method.empty()) {
        set("methods", f.method);
    }
    if (f.first_order) {
        set("second_order", "false");
    }
    if (!f.out.empty()) {
        set("out", f.out);
    }
    if (s == HA_OK) {
        // Surfaces invalid combinations before any stage runs.
        char hash[17];
        s = ha_config_hash(raw, hash, sizeof hash);
    }
    return s;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Few-shot trajectory adaptation to new robot kinematics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ha_version());

    Flags flags;
    CLI::App* gen = app.add_subcommand("gen-data", "Plan the canonical set and the meta-task datasets");
    CLI::App* train = app.add_subcommand("train", "Train the VAE, the sub-policy and the meta-learners");
    CLI::App* eval = app.add_subcommand("evaluate", "Meta-test on novel robots and write results");
    CLI::App* latents = app.add_subcommand("export-latents", "Write task latents of the meta-training robots");
    CLI::App* report = app.add_subcommand("report", "Summarize evaluated scenarios");
    for (CLI::App* cmd : {gen, train, eval, latents, report}) {
        add_common(cmd, flags);
    }
    train->add_option("--stage", flags.stage, "vae, subpolicy, meta, meta:<method> or all")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    ConfigPtr config(nullptr, &ha_config_free);
    if (const ha_status s = build_config(flags, config); s != HA_OK) {
        return fail(s, "config");
    }

    ha_status s = HA_OK;
    const char* stage = "cli";
    if (gen->parsed()) {
        stage = "gen-data";
        s = ha_gen_data(config.get(), print_line, nullptr);
    } else if (train->parsed()) {
        stage = "train";
        s = ha_train(config.get(), flags.stage.c_str(), print_line, nullptr);
    } else if (eval->parsed()) {
        stage = "evaluate";
        s = ha_evaluate(config.get(), print_line, nullptr);
    } else if (latents->parsed()) {
        stage = "export-latents";
        s = ha_export_latents(config.get(), print_line, nullptr);
    } else if (report->parsed()) {
        stage = "report";
        s = ha_report(config.get(), print_line, nullptr);
    }
    return s == HA_OK ? 0 : fail(s, stage);
}
