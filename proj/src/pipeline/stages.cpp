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

#include "pipeline/stages.hpp"

#include "common/container.hpp"
#include "common/error.hpp"
#include "models/checkpoint.hpp"
#include "pipeline/datasets.hpp"
#include "pipeline/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>

namespace hyperadapt::pipeline {

namespace fs = std::filesystem;
using evalharness::ScenarioKind;
using evalharness::ScenarioSpec;
using metalearn::Method;

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) {
            throw Error(ErrorKind::io, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
        }
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) {
        throw Error(ErrorKind::io, "cannot write " + path.string());
    }
}

std::string read_text(const fs::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw Error(ErrorKind::io, "cannot read " + path.string());
    }
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

namespace {

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void say(const Logger& log, const std::string& line)
{
    if (log) {
        log(line);
    }
}

void save(const fs::path& path, const Container& c)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    write_container(path, c);
}

// The config every stage runs under: meta streams follow the run seed, as in
// evalharness::run_scenario.
evalharness::ExperimentConfig experiment_of(const RunConfig& config)
{
    evalharness::ExperimentConfig e = config.experiment;
    e.meta.seed = config.seed;
    return e;
}

// Reads a file another stage wrote and checks it belongs to this config.
Container load_dependency(const fs::path& path, const std::string& hash, const std::string& producer)
{
    if (!fs::exists(path)) {
        throw Error(ErrorKind::missing_dependency,
                    "missing " + path.string() + "; run '" + producer + "' first");
    }
    Container c = read_container(path);
    const std::string found = c.manifest.value("config_hash", std::string());
    if (found != hash) {
        throw Error(ErrorKind::config, path.string() + " was written under config hash " + found
                                           + " but the current config hashes to " + hash + "; re-run '" + producer
                                           + "'");
    }
    return c;
}

void stamp(Container& c, const std::string& hash, std::uint64_t seed)
{
    c.manifest["config_hash"] = hash;
    c.manifest["seed"] = seed;
}

std::string method_str(Method m)
{
    return std::string(metalearn::method_name(m));
}

// ---- shared loading -------------------------------------------------------

robotsim::CanonicalSet load_canonical_set(const Layout& layout, const std::string& hash)
{
    return decode_canonical_set(load_dependency(layout.canonical_data(), hash, "gen-data"));
}

evalharness::CanonicalModels load_canonical(const Layout& layout, const std::string& hash)
{
    evalharness::CanonicalModels m;
    m.set = load_canonical_set(layout, hash);
    m.vae = models::load_vae(load_dependency(layout.vae(), hash, "train vae"));
    m.policy = models::load_subpolicy(load_dependency(layout.subpolicy(), hash, "train subpolicy"));
    return m;
}

std::vector<metalearn::TaskTensors> load_task_tensors(const Layout& layout, const std::string& tag,
                                                      const std::string& hash,
                                                      const evalharness::CanonicalModels& canonical)
{
    std::vector<robotsim::MetaTaskDataset> tasks =
        decode_tasks(load_dependency(layout.tasks(tag), hash, "gen-data"), canonical.set);
    const robotsim::AlphaEncoder encoder = [&](const robotsim::Trajectory& tau) {
        return models::encode_alpha(canonical.vae, tau);
    };
    for (auto& t : tasks) {
        robotsim::attach_alphas(t, canonical.set, encoder);
    }
    return evalharness::to_tensors(tasks, canonical.vae.norm);
}

metalearn::MetaModel load_meta(const Layout& layout, const std::string& tag, Method method, const std::string& hash)
{
    const Container c = load_dependency(layout.meta(tag, method), hash, "train meta:" + method_str(method));
    metalearn::MetaModel m = metalearn::load_meta_model(c);
    return m;
}

std::string csv_head(const std::string& hash, const std::string& columns)
{
    return "# config_hash=" + hash + "\n" + columns + "\n";
}

std::string metrics_csv(std::span<const metalearn::EpochMetrics> rows, const std::string& hash)
{
    std::string out = csv_head(hash, "epoch,total_loss,recon_nll,kl,lambda");
    for (const auto& m : rows) {
        out += std::to_string(m.epoch) + "," + num(m.total) + "," + num(m.nll) + "," + num(m.kl) + ","
               + num(m.lambda) + "\n";
    }
    return out;
}

// Canonical models have a single loss per epoch.
std::string loss_csv(std::span<const double> loss, const std::string& hash)
{
    std::string out = csv_head(hash, "epoch,total_loss");
    for (std::size_t i = 0; i < loss.size(); ++i) {
        out += std::to_string(i + 1) + "," + num(loss[i]) + "\n";
    }
    return out;
}

// ---- training ---------------------------------------------------------------

constexpr std::size_t kMetricColumns = 5;

std::vector<double> flatten_metrics(std::span<const metalearn::EpochMetrics> rows)
{
    std::vector<double> out;
    for (const auto& m : rows) {
        out.insert(out.end(), {static_cast<double>(m.epoch), m.total, m.nll, m.kl, m.lambda});
    }
    return out;
}

std::vector<metalearn::EpochMetrics> unflatten_metrics(std::span<const double> flat)
{
    if (flat.size() % kMetricColumns != 0) {
        throw Error(ErrorKind::io, "checkpoint: malformed metrics block");
    }
    std::vector<metalearn::EpochMetrics> out;
    for (std::size_t i = 0; i < flat.size(); i += kMetricColumns) {
        out.push_back({static_cast<std::size_t>(flat[i]), flat[i + 1], flat[i + 2], flat[i + 3], flat[i + 4]});
    }
    return out;
}

Container meta_checkpoint(const metalearn::MetaModel& model, std::span<const metalearn::EpochMetrics> history,
                          const ScenarioSpec& spec, const std::string& hash)
{
    Container c = metalearn::save_meta_model(model);
    stamp(c, hash, spec.seed);
    c.manifest["scenario"] = variant_tag(spec);
    models::add_block(c, "metrics", flatten_metrics(history),
                      {{"columns", {"epoch", "total_loss", "recon_nll", "kl", "lambda"}}});
    return c;
}

void train_vae_stage(const RunConfig& config, const Layout& layout, const std::string& hash, const Logger& log)
{
    const robotsim::CanonicalSet set = load_canonical_set(layout, hash);
    std::vector<robotsim::Trajectory> data;
    for (const auto& e : set.entries) {
        data.push_back(e.tau);
    }
    const auto& fit = config.experiment.vae_fit;
    say(log, "train vae: " + std::to_string(data.size()) + " trajectories, " + std::to_string(fit.epochs)
                 + " epochs");
    std::vector<double> loss;
    const models::TrajectoryVAE vae = models::train_vae(data, config.experiment.dims, fit, config.seed, &loss);
    Container c = models::save_vae(vae);
    stamp(c, hash, config.seed);
    save(layout.vae(), c);
    write_text(layout.metrics("vae"), loss_csv(loss, hash));
    say(log, "train vae: final loss " + num(loss.empty() ? 0.0 : loss.back()));
}

void train_subpolicy_stage(const RunConfig& config, const Layout& layout, const std::string& hash,
                           const Logger& log)
{
    const robotsim::CanonicalSet set = load_canonical_set(layout, hash);
    const models::TrajectoryVAE vae = models::load_vae(load_dependency(layout.vae(), hash, "train vae"));
    std::vector<robotsim::Trajectory> data;
    std::vector<robotsim::Goal> goals;
    for (const auto& e : set.entries) {
        data.push_back(e.tau);
        goals.push_back(e.goal);
    }
    const auto& fit = config.experiment.subpolicy_fit;
    say(log, "train subpolicy: " + std::to_string(fit.epochs) + " epochs");
    std::vector<double> loss;
    const models::SubPolicy policy = models::train_subpolicy(vae, goals, data, config.experiment.goal_dim,
                                                             config.experiment.dims, fit, config.seed, &loss);
    Container c = models::save_subpolicy(policy);
    stamp(c, hash, config.seed);
    save(layout.subpolicy(), c);
    write_text(layout.metrics("subpolicy"), loss_csv(loss, hash));
    say(log, "train subpolicy: final loss " + num(loss.empty() ? 0.0 : loss.back()));
}

void train_meta_stage(const RunConfig& config, const Layout& layout, const std::string& hash, Method method,
                      const Logger& log)
{
    const evalharness::ExperimentConfig cfg = experiment_of(config);
    const evalharness::CanonicalModels canonical = load_canonical(layout, hash);
    for (const ScenarioSpec& spec : variants(config)) {
        const std::string tag = variant_tag(spec);
        const std::vector<metalearn::TaskTensors> tasks = load_task_tensors(layout, tag, hash, canonical);
        const fs::path path = layout.meta(tag, method);

        metalearn::MetaModel model;
        std::vector<metalearn::EpochMetrics> history;
        std::optional<Container> previous;
        if (fs::exists(path)) {
            previous = read_container(path);
            if (previous->manifest.value("config_hash", std::string()) != hash) {
                say(log, tag + "/" + method_str(method) + ": replacing a checkpoint from another config");
                previous.reset();
            }
        }
        if (previous) {
            const Container& c = *previous;
            model = metalearn::load_meta_model(c);
            if (models::has_block(c, "metrics")) {
                history = unflatten_metrics(models::read_block(c, "metrics"));
            }
            if (model.method != method || history.size() != model.epochs_done) {
                throw Error(ErrorKind::io, path.string() + " is inconsistent; delete it to retrain");
            }
            say(log, tag + "/" + method_str(method) + ": resuming at epoch " + std::to_string(model.epochs_done));
        } else {
            model = metalearn::init_meta_model(method, cfg.dims, canonical.vae, cfg.meta);
        }
        if (model.epochs_done < cfg.meta.epochs) {
            say(log, tag + "/" + method_str(method) + ": " + std::to_string(tasks.size()) + " tasks, epochs "
                         + std::to_string(model.epochs_done + 1) + ".." + std::to_string(cfg.meta.epochs));
            const std::size_t every = config.checkpoint_every;
            metalearn::meta_train(model, tasks, cfg.meta,
                                  [&](const metalearn::EpochMetrics& m, const metalearn::MetaModel& current) {
                                      history.push_back(m);
                                      if (every != 0 && m.epoch % every == 0 && m.epoch < cfg.meta.epochs) {
                                          save(path, meta_checkpoint(current, history, spec, hash));
                                          say(log, tag + "/" + method_str(method) + ": checkpoint at epoch "
                                                       + std::to_string(m.epoch));
                                      }
                                      if (m.epoch % 10 == 0 || m.epoch == cfg.meta.epochs) {
                                          say(log, tag + "/" + method_str(method) + " epoch "
                                                       + std::to_string(m.epoch) + " loss " + num(m.total)
                                                       + " kl " + num(m.kl) + " lambda " + num(m.lambda));
                                      }
                                  });
        } else {
            say(log, tag + "/" + method_str(method) + ": already trained");
        }
        save(path, meta_checkpoint(model, history, spec, hash));
        write_text(layout.meta_metrics(tag, method), metrics_csv(history, hash));
    }
}

// ---- evaluation ---------------------------------------------------------------

std::vector<evalharness::LatentRow> variant_latents(const metalearn::MetaModel& model, const ScenarioSpec& spec,
                                                    std::span<const metalearn::TaskTensors> tasks,
                                                    const evalharness::CanonicalModels& canonical,
                                                    const evalharness::ExperimentConfig& cfg)
{
    std::vector<evalharness::LatentRow> rows = evalharness::export_latents(model, tasks);
    if (spec.kind == ScenarioKind::c || spec.kind == ScenarioKind::c_plus_k) {
        std::vector<metalearn::TaskTensors> held;
        for (const robotsim::RobotInstance& robot : evalharness::test_robots(spec, spec.platform)) {
            held.push_back(evalharness::support_tensors(robot, canonical, cfg));
        }
        const auto extra = evalharness::export_latents(model, held, true);
        rows.insert(rows.end(), extra.begin(), extra.end());
    }
    return rows;
}

std::string latents_csv(std::span<const evalharness::LatentRow> rows, const std::string& hash)
{
    std::string out = csv_head(hash, "robot_id,platform,z_x,z_y,held_out");
    for (const auto& r : rows) {
        out += r.robot + "," + std::string(robotsim::platform_name(r.platform)) + "," + num(r.z_x) + ","
               + num(r.z_y) + "," + (r.held_out ? "1" : "0") + "\n";
    }
    return out;
}

std::string latent_plot(std::span<const evalharness::LatentRow> rows, const std::string& title,
                        const std::string& hash)
{
    std::vector<ScatterPoint> points;
    for (const auto& r : rows) {
        points.push_back({r.z_x, r.z_y, std::string(robotsim::platform_name(r.platform)), r.held_out});
    }
    return scatter_plot(title, points, hash);
}

std::string results_csv(std::span<const evalharness::ResultRecord> records, const std::string& hash)
{
    std::string out = csv_head(
        hash, "scenario,method,platform,robot_index,policy_index,mean_error_cm,ci_half_width_cm,seed");
    for (const auto& r : records) {
        const std::string ci = r.summary.ci_half_width ? num(*r.summary.ci_half_width) : std::string();
        for (std::size_t j = 0; j < r.summary.policy_means.size(); ++j) {
            out += r.scenario + "," + method_str(r.method) + "," + std::string(robotsim::platform_name(r.platform))
                   + "," + std::to_string(r.robot_index) + "," + std::to_string(j) + ","
                   + num(r.summary.policy_means[j]) + "," + ci + "," + std::to_string(r.seed) + "\n";
        }
    }
    return out;
}

std::string robots_csv(std::span<const evalharness::ResultRecord> records, const std::string& hash)
{
    std::string out = csv_head(hash, "scenario,method,platform,robot,robot_index,policies,mean_error_cm,"
                                     "ci_half_width_cm,success_rate,seed");
    for (const auto& r : records) {
        out += r.scenario + "," + method_str(r.method) + "," + std::string(robotsim::platform_name(r.platform)) + ","
               + r.robot + "," + std::to_string(r.robot_index) + "," + std::to_string(r.summary.policy_means.size())
               + "," + num(r.summary.mean) + ","
               + (r.summary.ci_half_width ? num(*r.summary.ci_half_width) : std::string()) + ","
               + num(r.success_rate) + "," + std::to_string(r.seed) + "\n";
    }
    return out;
}

std::string errors_plot(std::span<const evalharness::ResultRecord> records, const std::string& tag,
                        const std::string& hash)
{
    std::vector<ErrorBar> bars;
    for (const auto& r : records) {
        bars.push_back({r.robot, method_str(r.method), r.summary.mean, r.summary.ci_half_width.value_or(0.0)});
    }
    return error_bar_plot("Reaching error, scenario " + tag, "error (cm)", bars, hash);
}

std::vector<Method> encoder_methods(const RunConfig& config)
{
    std::vector<Method> out;
    for (const Method m : config.methods) {
        if (m != Method::maml) {
            out.push_back(m);
        }
    }
    return out;
}

// ---- report ---------------------------------------------------------------------

std::vector<std::vector<std::string>> read_csv(const fs::path& path)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read_text(path));
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos) {
                break;
            }
            start = comma + 1;
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

double to_number(const std::string& s, const fs::path& origin)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::io, origin.string() + ": malformed number '" + s + "'");
}

std::string require_hash(const fs::path& path, const std::string& hash, const std::string& producer)
{
    if (!fs::exists(path)) {
        throw Error(ErrorKind::missing_dependency, "missing " + path.string() + "; run '" + producer + "' first");
    }
    const std::string text = read_text(path);
    const std::string expected = "# config_hash=" + hash + "\n";
    if (text.compare(0, expected.size(), expected) != 0) {
        throw Error(ErrorKind::config,
                    path.string() + " does not carry config hash " + hash + "; re-run '" + producer + "'");
    }
    return text;
}

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd"};

template <typename F>
void tagged(const std::string& stage, F&& body)
{
    try {
        body();
    } catch (const Error& e) {
        rethrow_tagged(stage, e);
    } catch (const fs::filesystem_error& e) {
        throw Error(ErrorKind::io, "[" + stage + "] " + e.what());
    }
}

} // namespace

void cmd_gen_data(const RunConfig& config, const Logger& log)
{
    tagged("gen-data", [&] {
        const Layout layout{config.out};
        const std::string hash = config_hash(config);
        const evalharness::ExperimentConfig& cfg = config.experiment;
        const std::vector<ScenarioSpec> specs = variants(config);
        write_text(layout.config_snapshot(), "# config_hash=" + hash + "\n" + serialize(config));

        say(log, "gen-data: canonical set of " + std::to_string(cfg.data.pool_size) + " goals");
        const robotsim::CanonicalSet set =
            robotsim::build_canonical_set(evalharness::canonical_robot(cfg), config.seed, cfg.data);
        save(layout.canonical_data(), encode_canonical_set(set, config.seed, cfg.data, hash));

        for (const ScenarioSpec& spec : specs) {
            const std::string tag = variant_tag(spec);
            std::vector<robotsim::MetaTaskDataset> tasks;
            for (const robotsim::RobotInstance& robot : evalharness::train_robots(spec)) {
                tasks.push_back(robotsim::plan_task(robot, set, spec.seed, cfg.data));
            }
            save(layout.tasks(tag), encode_tasks(tasks, tag, spec.seed, cfg.data, hash));
            say(log, "gen-data: " + tag + ": " + std::to_string(tasks.size()) + " task datasets");
        }
    });
}

void cmd_train(const RunConfig& config, std::string_view stage, const Logger& log)
{
    const Layout layout{config.out};
    const std::string hash = config_hash(config);
    if (stage == "vae") {
        tagged("train:vae", [&] { train_vae_stage(config, layout, hash, log); });
    } else if (stage == "subpolicy") {
        tagged("train:subpolicy", [&] { train_subpolicy_stage(config, layout, hash, log); });
    } else if (stage == "meta" || stage == "all") {
        if (stage == "all") {
            cmd_train(config, "vae", log);
            cmd_train(config, "subpolicy", log);
        }
        for (const Method m : config.methods) {
            tagged("train:meta:" + method_str(m), [&] { train_meta_stage(config, layout, hash, m, log); });
        }
    } else if (stage.substr(0, 5) == "meta:") {
        Method m{};
        tagged("train", [&] { m = metalearn::parse_method(stage.substr(5)); });
        tagged("train:meta:" + method_str(m), [&] { train_meta_stage(config, layout, hash, m, log); });
    } else {
        throw Error(ErrorKind::invalid_argument, "[train] unknown stage '" + std::string(stage)
                                                     + "' (expected vae, subpolicy, meta, meta:<method> or all)");
    }
}

void cmd_evaluate(const RunConfig& config, const Logger& log)
{
    tagged("evaluate", [&] {
        const Layout layout{config.out};
        const std::string hash = config_hash(config);
        const evalharness::ExperimentConfig cfg = experiment_of(config);
        const evalharness::CanonicalModels canonical = load_canonical(layout, hash);
        for (const ScenarioSpec& spec : variants(config)) {
            const std::string tag = variant_tag(spec);
            const std::string label = scenario_label(spec);
            std::vector<metalearn::MetaModel> trained;
            for (const Method m : config.methods) {
                trained.push_back(load_meta(layout, tag, m, hash));
            }
            std::vector<evalharness::ResultRecord> records;
            for (const metalearn::MetaModel& model : trained) {
                for (const robotsim::Platform p : evalharness::test_platforms(spec)) {
                    for (const robotsim::RobotInstance& robot : evalharness::test_robots(spec, p)) {
                        records.push_back(evalharness::evaluate_method(model, canonical, robot, cfg, label, spec.seed));
                    }
                }
                say(log, "evaluate: " + tag + "/" + method_str(model.method) + " done");
            }
            write_text(layout.results(tag), results_csv(records, hash));
            write_text(layout.robot_summary(tag), robots_csv(records, hash));
            write_text(layout.plot(tag + "-errors"), errors_plot(records, tag, hash));

            const auto ours = std::find_if(trained.begin(), trained.end(),
                                           [](const auto& m) { return m.method == Method::ours; });
            if (ours != trained.end()) {
                const auto tasks = load_task_tensors(layout, tag, hash, canonical);
                const auto rows = variant_latents(*ours, spec, tasks, canonical, cfg);
                write_text(layout.plot(tag + "-latents"), latent_plot(rows, "Task latents, scenario " + tag, hash));
            }
        }
    });
}

void cmd_export_latents(const RunConfig& config, const Logger& log)
{
    tagged("export-latents", [&] {
        const std::vector<Method> methods = encoder_methods(config);
        if (methods.empty()) {
            throw Error(ErrorKind::invalid_argument, "none of the selected methods has a task encoder");
        }
        const Layout layout{config.out};
        const std::string hash = config_hash(config);
        const evalharness::ExperimentConfig cfg = experiment_of(config);
        const evalharness::CanonicalModels canonical = load_canonical(layout, hash);
        for (const ScenarioSpec& spec : variants(config)) {
            const std::string tag = variant_tag(spec);
            const auto tasks = load_task_tensors(layout, tag, hash, canonical);
            for (const Method m : methods) {
                const metalearn::MetaModel model = load_meta(layout, tag, m, hash);
                const auto rows = variant_latents(model, spec, tasks, canonical, cfg);
                write_text(layout.latents(tag, m), latents_csv(rows, hash));
                write_text(layout.plot(tag + "-latents-" + method_str(m)),
                           latent_plot(rows, "Task latents (" + method_str(m) + "), scenario " + tag, hash));
                say(log, "export-latents: " + tag + "/" + method_str(m) + ": " + std::to_string(rows.size())
                             + " robots");
            }
        }
    });
}

void cmd_report(const RunConfig& config, const Logger& log)
{
    tagged("report", [&] {
        const Layout layout{config.out};
        const std::string hash = config_hash(config);

        // (variant, method, platform) -> robot means
        std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> means;
        std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> success;
        std::vector<std::string> tags;
        for (const ScenarioSpec& spec : variants(config)) {
            const std::string tag = variant_tag(spec);
            tags.push_back(tag);
            const fs::path path = layout.robot_summary(tag);
            require_hash(path, hash, "evaluate");
            for (const auto& row : read_csv(path)) {
                if (row.size() != 10) {
                    throw Error(ErrorKind::io, path.string() + ": expected 10 columns");
                }
                const auto key = std::make_tuple(tag, row[1], row[2]);
                means[key].push_back(to_number(row[6], path));
                success[key].push_back(to_number(row[8], path));
            }

            std::vector<Series> series;
            for (std::size_t i = 0; i < config.methods.size(); ++i) {
                const Method m = config.methods[i];
                const fs::path mpath = layout.meta_metrics(tag, m);
                require_hash(mpath, hash, "train meta:" + method_str(m));
                Series s{method_str(m), kPalette[i % 4], {}};
                for (const auto& row : read_csv(mpath)) {
                    s.points.emplace_back(to_number(row.at(0), mpath), to_number(row.at(1), mpath));
                }
                series.push_back(std::move(s));
            }
            write_text(layout.plot(tag + "-loss"),
                       line_plot("Meta-training loss, scenario " + tag, "epoch", "total loss", series, true, hash));
        }

        const auto mean_of = [](const std::vector<double>& v) {
            double s = 0.0;
            for (const double x : v) {
                s += x;
            }
            return v.empty() ? 0.0 : s / static_cast<double>(v.size());
        };
        std::string csv = csv_head(hash, "scenario,method,platform,robots,mean_error_cm,success_rate");
        std::string md = "# Summary\n\nconfig hash `" + hash + "`, seed " + std::to_string(config.seed)
                         + "\n\nMean over test robots of each robot's mean reaching error (cm).\n";
        for (const std::string& tag : tags) {
            md += "\n## " + tag + "\n\n| method | platform | robots | error (cm) | success |\n|---|---|---|---|---|\n";
            for (const auto& [key, v] : means) {
                if (std::get<0>(key) != tag) {
                    continue;
                }
                const std::string m = num(mean_of(v));
                const std::string sr = num(mean_of(success.at(key)));
                csv += tag + "," + std::get<1>(key) + "," + std::get<2>(key) + "," + std::to_string(v.size()) + ","
                       + m + "," + sr + "\n";
                md += "| " + std::get<1>(key) + " | " + std::get<2>(key) + " | " + std::to_string(v.size()) + " | "
                      + m + " | " + sr + " |\n";
            }
        }
        write_text(layout.report_csv(), csv);
        write_text(layout.report_md(), md);
        say(log, "report: " + layout.report_md().string());
    });
}

} // namespace hyperadapt::pipeline
