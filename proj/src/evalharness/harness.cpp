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

#include "evalharness/harness.hpp"

#include "common/error.hpp"
#include "common/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hyperadapt::evalharness {

using metalearn::Method;

std::string_view selection_name(Selection s)
{
    return s == Selection::all ? "all" : "support-nll";
}

Selection parse_selection(std::string_view name)
{
    if (name == "all") {
        return Selection::all;
    }
    if (name == "support-nll") {
        return Selection::support_nll;
    }
    throw Error(ErrorKind::invalid_argument,
                "unknown selection '" + std::string(name) + "' (expected all or support-nll)");
}

robotsim::RobotInstance canonical_robot(const ExperimentConfig& config)
{
    return robotsim::nominal_robot(robotsim::platform_template(config.canonical_platform), -1);
}

robotsim::GoalSampler goal_sampler(const ExperimentConfig& config)
{
    return {canonical_robot(config), config.data.goal_spread};
}

CanonicalModels train_canonical(const ExperimentConfig& config, std::uint64_t seed)
{
    CanonicalModels c;
    try {
        c.set = robotsim::build_canonical_set(canonical_robot(config), seed, config.data);
    } catch (const Error& e) {
        rethrow_tagged("gen-data", e);
    }
    std::vector<robotsim::Trajectory> data;
    std::vector<robotsim::Goal> goals;
    for (const auto& e : c.set.entries) {
        data.push_back(e.tau);
        goals.push_back(e.goal);
    }
    try {
        c.vae = models::train_vae(data, config.dims, config.vae_fit, seed, &c.vae_loss);
    } catch (const Error& e) {
        rethrow_tagged("train:vae", e);
    }
    try {
        c.policy = models::train_subpolicy(c.vae, goals, data, config.goal_dim, config.dims, config.subpolicy_fit,
                                           seed, &c.subpolicy_loss);
    } catch (const Error& e) {
        rethrow_tagged("train:subpolicy", e);
    }
    return c;
}

std::vector<robotsim::MetaTaskDataset> build_tasks(std::span<const robotsim::RobotInstance> robots,
                                                   const CanonicalModels& canonical, const ExperimentConfig& config,
                                                   std::uint64_t seed)
{
    const robotsim::AlphaEncoder encoder = [&](const robotsim::Trajectory& tau) {
        return models::encode_alpha(canonical.vae, tau);
    };
    return robotsim::build_meta_dataset(robots, canonical.set, seed, config.data, encoder);
}

std::vector<metalearn::TaskTensors> to_tensors(std::span<const robotsim::MetaTaskDataset> tasks,
                                               const models::Normalizer& norm)
{
    std::vector<metalearn::TaskTensors> out;
    out.reserve(tasks.size());
    for (const auto& t : tasks) {
        out.push_back(metalearn::make_task_tensors(t, norm));
    }
    return out;
}

metalearn::TaskTensors support_tensors(const robotsim::RobotInstance& robot, const CanonicalModels& canonical,
                                       const ExperimentConfig& config)
{
    robotsim::MetaTaskDataset task = robotsim::plan_support(robot, canonical.set, config.data);
    robotsim::attach_alphas(task, canonical.set, [&](const robotsim::Trajectory& tau) {
        return models::encode_alpha(canonical.vae, tau);
    });
    return metalearn::make_support_tensors(robot, task.support, canonical.vae.norm);
}

std::vector<double> evaluate_policy(const models::SubPolicy& policy, const TrajectoryDecoder& decoder,
                                    const robotsim::RobotInstance& robot, std::span<const robotsim::Goal> goals)
{
    std::vector<double> errors;
    errors.reserve(goals.size());
    for (const robotsim::Goal& goal : goals) {
        const std::vector<double> alpha = models::policy_distribution(policy, goal).mean;
        const robotsim::Trajectory tau = robotsim::clamp_to_limits(robot, decoder(alpha));
        errors.push_back(100.0 * robotsim::reaching_error(robot, tau, goal, policy.goal_dim));
    }
    return errors;
}

TrajectoryDecoder canonical_decoder(const models::TrajectoryVAE& vae, int robot_index)
{
    return [&vae, robot_index](std::span<const double> alpha) {
        return models::decode(vae.decoder, alpha, vae.norm, robot_index);
    };
}

ResultRecord evaluate_method(const metalearn::MetaModel& model, const CanonicalModels& canonical,
                             const robotsim::RobotInstance& robot, const ExperimentConfig& config,
                             std::string_view scenario, std::uint64_t seed)
{
    ResultRecord r;
    r.scenario = std::string(scenario);
    r.method = model.method;
    r.platform = robot.platform;
    r.robot = robot.name();
    r.robot_index = robot.index;
    r.seed = seed;

    const std::string stage = "evaluate:" + std::string(metalearn::method_name(model.method));
    try {
        const metalearn::TaskTensors support = support_tensors(robot, canonical, config);
        const std::uint64_t stream = stream_seed(
            seed, "metatest/" + std::string(metalearn::method_name(model.method)) + "/" + robot.name());
        std::vector<metalearn::AdaptedModel> adapted = metalearn::meta_test(model, support, config.meta, stream);
        if (config.selection == Selection::support_nll && adapted.size() > 1) {
            const auto best = std::min_element(adapted.begin(), adapted.end(), [](const auto& a, const auto& b) {
                return a.support_nll_after < b.support_nll_after;
            });
            adapted = {*best};
        }
        const std::vector<robotsim::Goal> goals = robotsim::sample_eval_goals(
            robot, goal_sampler(config), config.eval_goals, seed, config.data.planner);
        std::size_t successes = 0;
        for (const metalearn::AdaptedModel& a : adapted) {
            const TrajectoryDecoder decoder = [&](std::span<const double> alpha) {
                return metalearn::adapted_trajectory(model, a, alpha, robot.index);
            };
            r.errors.push_back(evaluate_policy(canonical.policy, decoder, robot, goals));
            successes += static_cast<std::size_t>(std::count_if(
                r.errors.back().begin(), r.errors.back().end(),
                [&](double e) { return e <= config.success_threshold_cm; }));
            r.support_nll_before.push_back(a.support_nll_before);
            r.support_nll_after.push_back(a.support_nll_after);
        }
        r.summary = aggregate(r.errors);
        r.success_rate = static_cast<double>(successes) / static_cast<double>(adapted.size() * goals.size());
    } catch (const Error& e) {
        rethrow_tagged(stage + "/" + robot.name(), e);
    }
    return r;
}

std::vector<LatentRow> export_latents(const metalearn::MetaModel& model,
                                      std::span<const metalearn::TaskTensors> tasks, bool held_out)
{
    std::vector<LatentRow> rows;
    rows.reserve(tasks.size());
    for (const auto& t : tasks) {
        const std::vector<double> z = metalearn::task_latent_mean(model, t);
        if (z.size() != 2) {
            throw ShapeError("latents: expected a 2-dimensional task latent");
        }
        rows.push_back({t.robot, t.platform, z[0], z[1], held_out});
    }
    return rows;
}

namespace {

double nearest_neighbour_accuracy(std::span<const LatentRow> rows, std::span<const std::size_t> labels)
{
    std::size_t hits = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t nearest = i;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            if (k == i) {
                continue;
            }
            const double d = std::hypot(rows[i].z_x - rows[k].z_x, rows[i].z_y - rows[k].z_y);
            if (d < best) {
                best = d;
                nearest = k;
            }
        }
        hits += labels[nearest] == labels[i] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(rows.size());
}

std::vector<std::size_t> platform_labels(std::span<const LatentRow> rows)
{
    std::vector<std::size_t> labels;
    labels.reserve(rows.size());
    bool mixed = false;
    for (const auto& r : rows) {
        labels.push_back(robotsim::platform_index(r.platform));
        mixed = mixed || labels.back() != labels.front();
    }
    if (!mixed) {
        throw Error(ErrorKind::invalid_argument, "latents: separation needs at least two platforms");
    }
    return labels;
}

} // namespace

double latent_separation_score(std::span<const LatentRow> rows)
{
    const std::vector<std::size_t> labels = platform_labels(rows);
    return nearest_neighbour_accuracy(rows, labels);
}

double shuffled_separation_score(std::span<const LatentRow> rows, std::size_t shuffles, std::uint64_t seed)
{
    std::vector<std::size_t> labels = platform_labels(rows);
    Rng rng(seed, "latents/shuffle");
    double total = 0.0;
    for (std::size_t s = 0; s < shuffles; ++s) {
        for (std::size_t i = labels.size() - 1; i > 0; --i) {
            std::swap(labels[i], labels[rng.below(i + 1)]);
        }
        total += nearest_neighbour_accuracy(rows, labels);
    }
    return total / static_cast<double>(shuffles);
}

ScenarioResult run_scenario(const ScenarioSpec& spec, std::span<const Method> methods,
                            const ExperimentConfig& config, const CanonicalModels* canonical)
{
    ExperimentConfig cfg = config;
    cfg.meta.seed = spec.seed;

    CanonicalModels own;
    if (canonical == nullptr) {
        own = train_canonical(cfg, spec.seed);
        canonical = &own;
    }

    std::vector<metalearn::TaskTensors> tasks;
    try {
        const std::vector<robotsim::RobotInstance> robots = train_robots(spec);
        tasks = to_tensors(build_tasks(robots, *canonical, cfg, spec.seed), canonical->vae.norm);
    } catch (const Error& e) {
        rethrow_tagged("gen-data", e);
    }

    ScenarioResult result;
    const std::string scenario(scenario_name(spec.kind));
    for (const Method method : methods) {
        const std::string stage = "train:meta:" + std::string(metalearn::method_name(method));
        metalearn::MetaModel model;
        try {
            model = metalearn::init_meta_model(method, cfg.dims, canonical->vae, cfg.meta);
            result.metrics[method] = metalearn::meta_train(model, tasks, cfg.meta);
        } catch (const Error& e) {
            rethrow_tagged(stage, e);
        }
        for (const robotsim::Platform p : test_platforms(spec)) {
            for (const robotsim::RobotInstance& robot : test_robots(spec, p)) {
                result.records.push_back(evaluate_method(model, *canonical, robot, cfg, scenario, spec.seed));
            }
        }
        if (method == Method::ours) {
            result.latents = export_latents(model, tasks);
            if (spec.kind == ScenarioKind::c || spec.kind == ScenarioKind::c_plus_k) {
                std::vector<metalearn::TaskTensors> held;
                for (const robotsim::RobotInstance& robot : test_robots(spec, spec.platform)) {
                    held.push_back(support_tensors(robot, *canonical, cfg));
                }
                const auto extra = export_latents(model, held, true);
                result.latents.insert(result.latents.end(), extra.begin(), extra.end());
            }
        }
        result.models.emplace(method, std::move(model));
    }
    return result;
}

std::optional<double> platform_mean(std::span<const ResultRecord> records, Method method,
                                    robotsim::Platform platform)
{
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& r : records) {
        if (r.method == method && r.platform == platform) {
            total += r.summary.mean;
            ++n;
        }
    }
    if (n == 0) {
        return std::nullopt;
    }
    return total / static_cast<double>(n);
}

} // namespace hyperadapt::evalharness
