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

#pragma once

#include "metalearn/meta.hpp"
#include "pipeline/config.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

namespace hyperadapt::pipeline {

using Logger = std::function<void(const std::string&)>;

// File layout under RunConfig::out.
struct Layout {
    std::filesystem::path root;

    [[nodiscard]] std::filesystem::path config_snapshot() const { return root / "config.txt"; }
    [[nodiscard]] std::filesystem::path canonical_data() const { return root / "data" / "canonical.hyd"; }
    [[nodiscard]] std::filesystem::path tasks(const std::string& tag) const
    {
        return root / "data" / ("tasks-" + tag + ".hyd");
    }
    [[nodiscard]] std::filesystem::path vae() const { return root / "checkpoints" / "vae.hyd"; }
    [[nodiscard]] std::filesystem::path subpolicy() const { return root / "checkpoints" / "subpolicy.hyd"; }
    [[nodiscard]] std::filesystem::path meta(const std::string& tag, metalearn::Method method) const
    {
        return root / "checkpoints" / tag / (std::string(metalearn::method_name(method)) + ".hyd");
    }
    [[nodiscard]] std::filesystem::path metrics(const std::string& name) const
    {
        return root / "metrics" / (name + ".csv");
    }
    [[nodiscard]] std::filesystem::path meta_metrics(const std::string& tag, metalearn::Method method) const
    {
        return root / "metrics" / tag / (std::string(metalearn::method_name(method)) + ".csv");
    }
    [[nodiscard]] std::filesystem::path results(const std::string& tag) const
    {
        return root / "results" / (tag + ".csv");
    }
    [[nodiscard]] std::filesystem::path robot_summary(const std::string& tag) const
    {
        return root / "results" / (tag + "-robots.csv");
    }
    [[nodiscard]] std::filesystem::path latents(const std::string& tag, metalearn::Method method) const
    {
        return root / "latents" / (tag + "-" + std::string(metalearn::method_name(method)) + ".csv");
    }
    [[nodiscard]] std::filesystem::path plot(const std::string& name) const
    {
        return root / "plots" / (name + ".svg");
    }
    [[nodiscard]] std::filesystem::path report_csv() const { return root / "report" / "summary.csv"; }
    [[nodiscard]] std::filesystem::path report_md() const { return root / "report" / "summary.md"; }
};

// Each command needs the outputs of the previous ones and fails with
// Error(missing_dependency) naming the stage to run first. Errors carry a
// "[stage]" prefix.

// Canonical set and the task datasets of every scenario variant.
void cmd_gen_data(const RunConfig& config, const Logger& log = {});

// stage: "vae", "subpolicy", "meta:<method>", "meta" (every configured
// method) or "all". Meta stages resume from a matching checkpoint.
void cmd_train(const RunConfig& config, std::string_view stage, const Logger& log = {});

// Results CSVs and error-bar plots; for "ours" also the latent scatter.
void cmd_evaluate(const RunConfig& config, const Logger& log = {});

// Latents CSV and scatter plot per configured method with a task encoder.
void cmd_export_latents(const RunConfig& config, const Logger& log = {});

// Summary tables over the evaluated variants and training-loss plots.
void cmd_report(const RunConfig& config, const Logger& log = {});

// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

} // namespace hyperadapt::pipeline
