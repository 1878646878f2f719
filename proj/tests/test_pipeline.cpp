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

#include "common/container.hpp"
#include "common/error.hpp"
#include "evalharness/harness.hpp"
#include "pipeline/config.hpp"
#include "pipeline/datasets.hpp"
#include "pipeline/stages.hpp"
#include "pipeline/svg.hpp"

#include <doctest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

using namespace hyperadapt;
using namespace hyperadapt::pipeline;
namespace fs = std::filesystem;
using metalearn::Method;

namespace {

constexpr const char* kTinyConfig = R"(# small enough to run every stage in seconds
scenario = c
platforms = baxter
seed = 11
robots_per_platform = 2
test_robots = 2
pool_size = 120
vae_epochs = 60
subpolicy_epochs = 60
meta_epochs = 4
meta_lr = 1e-3
meta_batch = 4
samples = 3
eval_goals = 4
checkpoint_every = 2
)";

RunConfig tiny_config(const fs::path& out)
{
    RunConfig c = parse_config(kTinyConfig, "tiny");
    c.out = out;
    return c;
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("hyperadapt-" + name + "-" + std::to_string(::getpid()));
    fs::remove_all(p);
    return p;
}

std::size_t data_lines(const std::string& csv)
{
    std::istringstream in(csv);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        n += (!line.empty() && line[0] != '#') ? 1 : 0;
    }
    return n - 1; // header
}

bool parses_as_xml(const std::string& text)
{
    try {
        std::istringstream in(text);
        boost::property_tree::ptree tree;
        boost::property_tree::read_xml(in, tree);
        return tree.count("svg") == 1;
    } catch (const std::exception&) {
        return false;
    }
}

std::string error_of(const std::function<void()>& f, ErrorKind* kind = nullptr)
{
    try {
        f();
    } catch (const Error& e) {
        if (kind != nullptr) {
            *kind = e.kind();
        }
        return e.what();
    }
    return {};
}

// One complete run shared by the end-to-end cases.
struct TinyRun {
    RunConfig config;
    std::string hash;

    TinyRun() : config(tiny_config(scratch("pipeline"))), hash(config_hash(config))
    {
        cmd_gen_data(config);
        cmd_train(config, "all");
        cmd_evaluate(config);
        cmd_export_latents(config);
        cmd_report(config);
    }
    ~TinyRun() { fs::remove_all(config.out); }

    [[nodiscard]] Layout layout() const { return {config.out}; }
};

const TinyRun& tiny_run()
{
    static const TinyRun run;
    return run;
}

} // namespace

TEST_CASE("config files set options and report bad lines")
{
    const RunConfig c = parse_config("scenario = c+k\nk_sweep = 0, 20\nmethods = ours,maml\n"
                                     "meta_lr = 2e-4   # comment\nsecond_order = false\ngoal_dim = 2\n");
    CHECK(c.scenario == evalharness::ScenarioKind::c_plus_k);
    CHECK(c.k_sweep == std::vector<std::size_t>{0, 20});
    CHECK(c.methods == std::vector<Method>{Method::ours, Method::maml});
    CHECK(c.experiment.meta.lr == 2e-4);
    CHECK_FALSE(c.experiment.meta.second_order);
    CHECK(c.experiment.goal_dim == 2);

    ErrorKind kind{};
    CHECK(error_of([] { parse_config("seed = 1\nbogus = 3\n", "run.conf"); }, &kind).find("run.conf:2")
          != std::string::npos);
    CHECK(kind == ErrorKind::config);
    CHECK(error_of([] { parse_config("meta_lr = fast\n"); }).find("meta_lr") != std::string::npos);
    CHECK(error_of([] { parse_config("goal_dim = 4\n"); }).find("goal_dim") != std::string::npos);
    CHECK(error_of([] { parse_config("seed 4\n"); }).find("key = value") != std::string::npos);
    CHECK(error_of([] { parse_config("support_size = 4\n"); }).find("support_size") != std::string::npos);
    CHECK(error_of([] { parse_config("methods = ours, reptile\n"); }).find("methods") != std::string::npos);
}

TEST_CASE("defaults are the full-scale hyperparameters")
{
    const RunConfig c;
    CHECK(c.experiment.meta.lr == 1e-4);
    CHECK(c.experiment.meta.beta == 5e-3);
    CHECK(c.experiment.meta.epochs == 1000);
    CHECK(c.experiment.meta.samples == 20);
    CHECK(c.experiment.data.support_size == 5);
    CHECK(c.methods.size() == 4);
}

TEST_CASE("serialized config parses back to the same hash")
{
    RunConfig c = parse_config(kTinyConfig);
    c.experiment.meta.beta = 0.1 + 0.2; // not representable in few digits
    const RunConfig back = parse_config(serialize(c));
    CHECK(serialize(back) == serialize(c));
    CHECK(config_hash(back) == config_hash(c));
    CHECK(config_hash(c).size() == 16);

    RunConfig moved = c;
    moved.out = "/elsewhere";
    moved.methods = {Method::avi};
    CHECK(config_hash(moved) == config_hash(c));
    RunConfig reseeded = c;
    reseeded.seed += 1;
    CHECK(config_hash(reseeded) != config_hash(c));
}

TEST_CASE("scenario variants and their tags")
{
    RunConfig c;
    c.scenario = evalharness::ScenarioKind::c_plus_k;
    const auto sweep = variants(c);
    REQUIRE(sweep.size() == 3);
    CHECK(variant_tag(sweep[0]) == "c+0-baxter");
    CHECK(variant_tag(sweep[2]) == "c+20-baxter");
    CHECK(scenario_label(sweep[1]) == "c+10");
    CHECK(sweep[2].injected == 20);

    c.scenario = evalharness::ScenarioKind::a;
    const auto single = variants(c);
    CHECK(single.size() == 4);
    CHECK(variant_tag(single[1]) == "a-" + std::string(robotsim::platform_name(single[1].platform)));

    c.scenario = evalharness::ScenarioKind::b;
    const auto all = variants(c);
    REQUIRE(all.size() == 1);
    CHECK(variant_tag(all[0]) == "b");
    CHECK(evalharness::train_robots(all[0]).size() == 400);

    c.scenario = evalharness::ScenarioKind::c_plus_k;
    c.k_sweep = {200};
    CHECK_THROWS_AS(variants(c), Error);
}

TEST_CASE("plots are well-formed XML carrying the config hash")
{
    const std::string hash = "0123456789abcdef";
    const std::string lines = line_plot("loss <&>", "epoch", "loss",
                                        {{"ours", "#1f77b4", {{1, 10.0}, {2, 1.0}, {3, 0.1}}},
                                         {"maml", "#ff7f0e", {{1, 5.0}, {2, 4.0}}}},
                                        true, hash);
    const std::string bars = error_bar_plot("errors", "cm",
                                            {{"yumi-1000", "ours", 1.5, 0.2}, {"yumi-1000", "maml", 3.0, 0.0},
                                             {"baxter-1001", "ours", 2.5, 1.0}},
                                            hash);
    const std::string scatter = scatter_plot(
        "z", {{0.1, 0.2, "yumi", false}, {-1.0, 0.5, "baxter", false}, {0.3, -0.4, "baxter", true}}, hash);
    for (const std::string& svg : {lines, bars, scatter}) {
        CHECK(parses_as_xml(svg));
        CHECK(svg.find(hash) != std::string::npos);
    }
    CHECK(lines.find("&lt;&amp;&gt;") != std::string::npos);
    // Degenerate inputs still give a valid document.
    CHECK(parses_as_xml(line_plot("empty", "x", "y", {}, false, hash)));
    CHECK(parses_as_xml(scatter_plot("one", {{0.0, 0.0, "yumi", false}}, hash)));
}

TEST_CASE("stage order is enforced")
{
    const RunConfig config = tiny_config(scratch("order"));
    ErrorKind kind{};
    std::string msg = error_of([&] { cmd_train(config, "meta:ours"); }, &kind);
    CHECK(kind == ErrorKind::missing_dependency);
    CHECK(msg.find("[train:meta:ours]") == 0);
    CHECK(msg.find("gen-data") != std::string::npos);

    cmd_gen_data(config);
    msg = error_of([&] { cmd_train(config, "meta:ours"); }, &kind);
    CHECK(kind == ErrorKind::missing_dependency);
    CHECK(msg.find("train vae") != std::string::npos);
    msg = error_of([&] { cmd_train(config, "subpolicy"); }, &kind);
    CHECK(msg.find("[train:subpolicy]") == 0);
    CHECK(msg.find("train vae") != std::string::npos);
    msg = error_of([&] { cmd_evaluate(config); }, &kind);
    CHECK(kind == ErrorKind::missing_dependency);
    CHECK(msg.find("[evaluate]") == 0);
    msg = error_of([&] { cmd_report(config); }, &kind);
    CHECK(msg.find("[report]") == 0);
    CHECK(error_of([&] { cmd_train(config, "decoder"); }).find("unknown stage") != std::string::npos);
    CHECK(error_of([&] { cmd_train(config, "meta:reptile"); }).find("[train]") == 0);

    RunConfig other = config;
    other.seed += 1;
    msg = error_of([&] { cmd_train(other, "vae"); }, &kind);
    CHECK(kind == ErrorKind::config);
    CHECK(msg.find("config hash") != std::string::npos);
    fs::remove_all(config.out);
}

TEST_CASE("regenerating data gives identical bytes")
{
    const TinyRun& run = tiny_run();
    const Layout layout = run.layout();
    const std::string canonical_bytes = read_text(layout.canonical_data());
    const Container canonical = decode_container(canonical_bytes, "canonical");
    CHECK(encode_container(regenerate_canonical_set(canonical.manifest)) == canonical_bytes);

    const std::string tag = variant_tag(variants(run.config).front());
    const std::string task_bytes = read_text(layout.tasks(tag));
    const Container tasks = decode_container(task_bytes, "tasks");
    CHECK(tasks.manifest.at("robots").size() == 6);
    CHECK(encode_container(regenerate_tasks(tasks.manifest, decode_canonical_set(canonical))) == task_bytes);

    // Running the stage again rewrites the same files.
    RunConfig again = run.config;
    again.out = scratch("again");
    cmd_gen_data(again);
    CHECK(read_text(Layout{again.out}.canonical_data()) == canonical_bytes);
    CHECK(read_text(Layout{again.out}.tasks(tag)) == task_bytes);
    fs::remove_all(again.out);
}

TEST_CASE("results have one row per method, robot and policy")
{
    const TinyRun& run = tiny_run();
    const auto spec = variants(run.config).front();
    const std::string tag = variant_tag(spec);
    std::size_t expected = 0;
    for (const Method m : run.config.methods) {
        const std::size_t policies = metalearn::is_probabilistic(m) ? run.config.experiment.meta.samples : 1;
        for (const auto p : evalharness::test_platforms(spec)) {
            expected += policies * evalharness::test_robots(spec, p).size();
        }
    }
    CHECK(expected == 20);
    const std::string results = read_text(run.layout().results(tag));
    CHECK(data_lines(results) == expected);
    CHECK(results.find("scenario,method,platform,robot_index,policy_index,mean_error_cm,ci_half_width_cm,seed")
          != std::string::npos);

    const std::string latents = read_text(run.layout().latents(tag, Method::ours));
    CHECK(data_lines(latents) == 8);
    CHECK(latents.find("robot_id,platform,z_x,z_y") != std::string::npos);
    CHECK(data_lines(read_text(run.layout().meta_metrics(tag, Method::avi))) == run.config.experiment.meta.epochs);
}

TEST_CASE("pipeline results agree with an in-memory scenario run")
{
    const TinyRun& run = tiny_run();
    evalharness::ExperimentConfig cfg = run.config.experiment;
    const auto spec = variants(run.config).front();
    const auto canonical = evalharness::train_canonical(cfg, run.config.seed);
    const auto result = evalharness::run_scenario(spec, run.config.methods, cfg, &canonical);

    std::string expected;
    for (const auto& r : result.records) {
        for (std::size_t j = 0; j < r.summary.policy_means.size(); ++j) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.10g", r.summary.policy_means[j]);
            expected += std::string(metalearn::method_name(r.method)) + "," + std::to_string(r.robot_index) + ","
                        + std::to_string(j) + "," + buf + "\n";
        }
    }
    std::string got;
    std::istringstream in(read_text(run.layout().results(variant_tag(spec))));
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ls(line);
        for (std::string item; std::getline(ls, item, ',');) {
            f.push_back(item);
        }
        REQUIRE(f.size() >= 6);
        got += f[1] + "," + f[3] + "," + f[4] + "," + f[5] + "\n";
    }
    CHECK(got == expected);
}

TEST_CASE("every output carries the config hash")
{
    const TinyRun& run = tiny_run();
    std::size_t files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(run.config.out)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        ++files;
        const fs::path& p = entry.path();
        const std::string text = read_text(p);
        INFO(p.string());
        if (p.extension() == ".hyd") {
            CHECK(decode_container(text, p.string()).manifest.at("config_hash") == run.hash);
        } else {
            CHECK(text.find(run.hash) != std::string::npos);
        }
        if (p.extension() == ".csv") {
            CHECK(text.rfind("# config_hash=" + run.hash + "\n", 0) == 0);
        }
        if (p.extension() == ".svg") {
            CHECK(parses_as_xml(text));
        }
    }
    // config, 2 datasets, 2 canonical checkpoints and metrics, 4 meta
    // checkpoints and metrics, results, summaries, plots, latents, report.
    CHECK(files >= 25);
}

TEST_CASE("interrupted meta-training resumes to identical bytes")
{
    const TinyRun& run = tiny_run();
    const auto tag = variant_tag(variants(run.config).front());
    const fs::path dir = scratch("resume");
    fs::create_directories(dir);
    for (const char* sub : {"data", "checkpoints"}) {
        fs::copy(run.config.out / sub, dir / sub, fs::copy_options::recursive);
    }
    RunConfig config = run.config;
    config.out = dir;
    const Layout layout{dir};
    fs::remove(layout.meta(tag, Method::ours));

    struct Interrupt {};
    CHECK_THROWS_AS(cmd_train(config, "meta:ours",
                              [](const std::string& line) {
                                  if (line.find("checkpoint at epoch 2") != std::string::npos) {
                                      throw Interrupt{};
                                  }
                              }),
                    Interrupt);
    const Container partial = read_container(layout.meta(tag, Method::ours));
    CHECK(partial.manifest.at("epochs_done") == 2);

    std::vector<std::string> lines;
    cmd_train(config, "meta:ours", [&](const std::string& line) { lines.push_back(line); });
    CHECK(std::any_of(lines.begin(), lines.end(),
                      [](const std::string& l) { return l.find("resuming at epoch 2") != std::string::npos; }));
    CHECK(read_text(layout.meta(tag, Method::ours)) == read_text(run.layout().meta(tag, Method::ours)));
    CHECK(read_text(layout.meta_metrics(tag, Method::ours))
          == read_text(run.layout().meta_metrics(tag, Method::ours)));

    // A finished checkpoint is left alone.
    lines.clear();
    cmd_train(config, "meta:ours", [&](const std::string& line) { lines.push_back(line); });
    CHECK(std::any_of(lines.begin(), lines.end(),
                      [](const std::string& l) { return l.find("already trained") != std::string::npos; }));
    fs::remove_all(dir);
}
