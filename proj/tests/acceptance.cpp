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

// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
// here; the experiment profile comes from the config file (configs/desk.conf).

#include "ad_cases.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"
#include "evalharness/harness.hpp"
#include "fd_oracle.hpp"
#include "kinematics_oracle.hpp"
#include "meta_miniature.hpp"
#include "pipeline/config.hpp"
#include "pipeline/stages.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

using namespace hyperadapt;
using namespace hyperadapt::evalharness;
using metalearn::Method;
using robotsim::Platform;
namespace fs = std::filesystem;

namespace {

// ---- tolerances --------------------------------------------------------------

constexpr double kPrimitiveTolerance = 1e-5;
constexpr double kInnerStepTolerance = 1e-4;
constexpr std::size_t kMinGradientInstances = 100;
constexpr double kGradientSeconds = 60.0;

constexpr double kFkTolerance = 1e-9;
constexpr double kIkTolerance = 1e-3;
constexpr std::size_t kFkInstances = 1000;
constexpr std::size_t kIkGoals = 1000;
constexpr double kKinematicsSeconds = 60.0;

constexpr std::size_t kConsistencyGoals = 100;
constexpr double kConsistencyTolerance = 2e-3;

constexpr double kRmseTolerance = 0.05;
constexpr double kCanonicalReachCm = 2.0;
constexpr std::size_t kCanonicalGoals = 30;
constexpr double kCanonicalSeconds = 300.0;

constexpr double kDescentFraction = 0.9;

constexpr std::size_t kMamlWorsePlatforms = 2;
constexpr double kOursNotWorseFraction = 0.5;
constexpr double kScenarioSeconds = 30.0 * 60.0;

constexpr double kSeparationMin = 0.8;
constexpr double kShuffledCentre = 0.25;
constexpr double kShuffledTolerance = 0.05;
constexpr std::size_t kShuffles = 20;

constexpr std::size_t kInjected = 20;

const std::vector<std::uint64_t> kSeeds{0, 1, 2};

// ---- helpers -----------------------------------------------------------------

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

class Stopwatch {
public:
    [[nodiscard]] double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

double mean_of(const std::vector<double>& v)
{
    double s = 0.0;
    for (const double x : v) {
        s += x;
    }
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Every experiment of one seed, computed on first use.
struct SeedRuns {
    std::optional<CanonicalModels> canonical;
    double canonical_seconds = 0.0;
    std::optional<ScenarioResult> b;
    double b_seconds = 0.0;
    std::map<Platform, ScenarioResult> a;
    double a_seconds = 0.0;
    std::map<std::size_t, ScenarioResult> injection;
};

class Experiments {
public:
    explicit Experiments(const pipeline::RunConfig& profile) : profile_(profile) {}

    const ExperimentConfig& config() const { return profile_.experiment; }

    SeedRuns& canonical(std::uint64_t seed)
    {
        SeedRuns& r = runs_[seed];
        if (!r.canonical) {
            log("seed %llu: canonical models", seed);
            const Stopwatch w;
            r.canonical = train_canonical(config(), seed);
            r.canonical_seconds = w.seconds();
        }
        return r;
    }

    const ScenarioResult& b(std::uint64_t seed)
    {
        SeedRuns& r = canonical(seed);
        if (!r.b) {
            log("seed %llu: scenario b (ours, maml)", seed);
            const Stopwatch w;
            const std::vector<Method> methods{Method::ours, Method::maml};
            r.b = run_scenario(spec(ScenarioKind::b, Platform::yumi, 0, seed), methods, config(), &*r.canonical);
            r.b_seconds = w.seconds();
        }
        return *r.b;
    }

    const ScenarioResult& a(std::uint64_t seed, Platform p)
    {
        SeedRuns& r = canonical(seed);
        if (!r.a.contains(p)) {
            log("seed %llu: scenario a-%s (maml)", seed, robotsim::platform_name(p).data());
            const Stopwatch w;
            const std::vector<Method> methods{Method::maml};
            r.a.emplace(p, run_scenario(spec(ScenarioKind::a, p, 0, seed), methods, config(), &*r.canonical));
            r.a_seconds += w.seconds();
        }
        return r.a.at(p);
    }

    const ScenarioResult& injection(std::uint64_t seed, std::size_t k)
    {
        SeedRuns& r = canonical(seed);
        if (!r.injection.contains(k)) {
            log("seed %llu: scenario c+%zu-baxter (ours)", seed, k);
            const std::vector<Method> methods{Method::ours};
            r.injection.emplace(
                k, run_scenario(spec(ScenarioKind::c_plus_k, Platform::baxter, k, seed), methods, config(),
                                &*r.canonical));
        }
        return r.injection.at(k);
    }

    // Wall time spent on canonical models and scenarios (a) and (b).
    double scenario_seconds() const
    {
        double total = 0.0;
        for (const auto& [seed, r] : runs_) {
            total += r.canonical_seconds + r.b_seconds + r.a_seconds;
        }
        return total;
    }

private:
    ScenarioSpec spec(ScenarioKind kind, Platform p, std::size_t k, std::uint64_t seed) const
    {
        return make_scenario(kind, p, k, profile_.robots_per_platform, profile_.test_robots, seed);
    }

    static void log(const char* f, auto... args)
    {
        std::fprintf(stderr, "  ... %s\n", fmt(f, args...).c_str());
    }

    pipeline::RunConfig profile_;
    std::map<std::uint64_t, SeedRuns> runs_;
};

// ---- criteria ----------------------------------------------------------------

Verdict autodiff_correctness()
{
    const Stopwatch w;
    std::size_t instances = 0;
    double worst_primitive = 0.0;
    double worst_inner = 0.0;
    Rng rng(101);
    for (const auto& c : testing::primitive_cases()) {
        for (int trial = 0; trial < 4; ++trial) {
            worst_primitive = std::max(worst_primitive, testing::primitive_fd_error(c, rng));
            ++instances;
        }
    }

    // First-order meta-gradient against its surrogate.
    const models::ModelDims mini = testing::miniature_dims();
    for (int trial = 0; trial < 4; ++trial) {
        metalearn::TrainConfig config;
        config.lambda_init = rng.uniform(0.05, 0.3);
        config.second_order = false;
        config.warm_start = false;
        const metalearn::MetaModel m = metalearn::init_meta_model(
            Method::maml, mini, testing::reference_vae(mini, rng.next()), config);
        worst_primitive =
            std::max(worst_primitive, testing::first_order_fd_error(m, testing::synthetic_task(mini, rng), config));
        ++instances;
    }

    // Full objective through the inner step: every method, one and two steps.
    for (int trial = 0; trial < 3; ++trial) {
        for (const std::size_t steps : {1, 2}) {
            for (const Method method : metalearn::kMethods) {
                metalearn::TrainConfig config;
                config.lambda_init = rng.uniform(0.05, 0.2);
                config.beta = rng.uniform(0.01, 0.5);
                config.inner_steps = steps;
                config.warm_start = false;
                const metalearn::TaskTensors tasks[] = {testing::synthetic_task(mini, rng),
                                                        testing::synthetic_task(mini, rng)};
                const std::vector<double> noise = testing::random_vector(8, rng, -1.5, 1.5);
                const metalearn::MetaModel m =
                    metalearn::init_meta_model(method, mini, testing::reference_vae(mini, rng.next()), config);
                worst_inner = std::max(worst_inner, testing::fd_error(m, tasks, config, noise));
                ++instances;
            }
        }
    }

    // The full-size 938-parameter decoder through one second-order step.
    {
        const models::ModelDims dims;
        metalearn::TaskTensors task;
        task.support_alpha = ad::DenseArray({5, 6}, testing::random_vector(30, rng));
        task.support_x = ad::DenseArray({5, 98}, testing::random_vector(490, rng));
        task.query_alpha = ad::DenseArray({6, 6}, testing::random_vector(36, rng));
        task.query_x = ad::DenseArray({6, 98}, testing::random_vector(588, rng));
        metalearn::TrainConfig config;
        config.lambda_init = 0.05;
        config.warm_start = false;
        const metalearn::MetaModel m =
            metalearn::init_meta_model(Method::maml, dims, testing::reference_vae(dims, 4), config);
        const metalearn::TaskTensors tasks[] = {task};
        worst_inner = std::max(worst_inner, testing::fd_error(m, tasks, config, std::vector<double>{0.0}));
        ++instances;
    }

    const double t = w.seconds();
    return {worst_primitive <= kPrimitiveTolerance && worst_inner <= kInnerStepTolerance
                && instances >= kMinGradientInstances && t < kGradientSeconds,
            fmt("%zu instances, max rel err %.2e on primitives and first-order (<= %.0e), %.2e through inner step (<= %.0e), %.1fs",
                instances, worst_primitive, kPrimitiveTolerance, worst_inner, kInnerStepTolerance, t)};
}

Verdict kinematics_oracle()
{
    const Stopwatch w;
    Rng rng(202);
    double worst_fk = 0.0;
    for (std::size_t i = 0; i < kFkInstances; ++i) {
        const std::vector<double> lengths{rng.uniform(0.05, 0.5), rng.uniform(0.05, 0.5), rng.uniform(0.05, 0.5)};
        const Eigen::Vector3d base(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1));
        const robotsim::KinematicChain chain = testing::planar_chain(lengths, base);
        const std::vector<double> q{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
        worst_fk = std::max(worst_fk, (chain.end_position(q) - testing::planar_oracle(lengths, q, base)).norm());
    }

    // Goals reachable by construction: forward kinematics of postures near
    // each robot's own home posture.
    double worst_ik = 0.0;
    std::size_t failed = 0;
    const robotsim::PlannerConfig planner;
    for (std::size_t i = 0; i < kIkGoals; ++i) {
        const Platform p = robotsim::kPlatforms[i % robotsim::kPlatforms.size()];
        const robotsim::RobotInstance robot =
            robotsim::sample_robot(robotsim::platform_template(p), stream_seed(202, std::to_string(i)),
                                   static_cast<int>(i));
        robotsim::JointVector q = robot.home();
        for (std::size_t k = 0; k < robotsim::kJoints; ++k) {
            const auto& lim = robot.chain.limits[k];
            q[static_cast<Eigen::Index>(k)] =
                std::clamp(q[static_cast<Eigen::Index>(k)] + rng.uniform(-0.35, 0.35), lim.lower, lim.upper);
        }
        const robotsim::Goal goal{robotsim::forward_kinematics(robot, q)};
        try {
            const robotsim::JointVector solution = robotsim::solve_ik(robot, goal, planner);
            worst_ik = std::max(worst_ik, (robotsim::forward_kinematics(robot, solution) - goal.position).norm());
        } catch (const UnreachableGoalError&) {
            ++failed;
        }
    }
    const double t = w.seconds();
    return {worst_fk <= kFkTolerance && worst_ik <= kIkTolerance && failed == 0 && t < kKinematicsSeconds,
            fmt("FK max err %.2e m over %zu planar chains (<= %.0e); IK max residual %.2e m, %zu/%zu unsolved "
                "(<= %.0e); %.1fs",
                worst_fk, kFkInstances, kFkTolerance, worst_ik, failed, kIkGoals, kIkTolerance, t)};
}

Verdict consistency(const ExperimentConfig& config)
{
    std::vector<robotsim::RobotInstance> robots;
    for (const Platform p : robotsim::kPlatforms) {
        for (int i = 0; i < 2; ++i) {
            robots.push_back(robotsim::sample_robot(robotsim::platform_template(p),
                                                    stream_seed(303, std::string(robotsim::platform_name(p))
                                                                         + std::to_string(i)),
                                                    i));
        }
    }
    const robotsim::GoalSampler sampler = goal_sampler(config);
    Rng rng(303);
    double worst = 0.0;
    std::size_t pairs = 0;
    std::size_t unreachable = 0;
    for (std::size_t g = 0; g < kConsistencyGoals; ++g) {
        const robotsim::Goal goal = sampler.sample(rng);
        std::vector<Eigen::Vector3d> ends;
        for (const auto& robot : robots) {
            try {
                ends.push_back(robotsim::end_state(robot, robotsim::plan_trajectory(robot, goal, config.data.planner)));
            } catch (const UnreachableGoalError&) {
                ++unreachable;
            }
        }
        for (std::size_t i = 0; i < ends.size(); ++i) {
            for (std::size_t k = i + 1; k < ends.size(); ++k) {
                worst = std::max(worst, (ends[i] - ends[k]).norm());
                ++pairs;
            }
        }
    }
    return {worst <= kConsistencyTolerance && pairs > 0,
            fmt("%zu goals on %zu robots of 4 platforms: %zu end-state pairs, max distance %.2e m (<= %.0e); "
                "%zu plans skipped as unreachable",
                kConsistencyGoals, robots.size(), pairs, worst, kConsistencyTolerance, unreachable)};
}

Verdict vae_quality(Experiments& ex)
{
    bool pass = true;
    std::string detail;
    for (const std::uint64_t seed : kSeeds) {
        SeedRuns& r = ex.canonical(seed);
        const Stopwatch w;
        const ExperimentConfig& cfg = ex.config();
        const robotsim::RobotInstance robot = canonical_robot(cfg);
        const std::vector<robotsim::Goal> goals =
            robotsim::sample_eval_goals(robot, goal_sampler(cfg), kCanonicalGoals, seed, cfg.data.planner);
        std::vector<robotsim::Trajectory> held;
        for (const auto& g : goals) {
            held.push_back(robotsim::plan_trajectory(robot, g, cfg.data.planner));
        }
        const double rmse = models::reconstruction_rmse(r.canonical->vae, held);
        const double reach =
            mean_of(evaluate_policy(r.canonical->policy, canonical_decoder(r.canonical->vae, -1), robot, goals));
        const double t = r.canonical_seconds + w.seconds();
        pass = pass && rmse <= kRmseTolerance && reach <= kCanonicalReachCm && t < kCanonicalSeconds;
        detail += fmt("%sseed %llu: RMSE %.4f rad, reach %.2f cm, %.0fs", detail.empty() ? "" : "; ",
                      static_cast<unsigned long long>(seed), rmse, reach, t);
    }
    return {pass, detail + fmt(" (<= %.2f rad, <= %.1f cm over %zu held-out goals)", kRmseTolerance,
                               kCanonicalReachCm, kCanonicalGoals)};
}

Verdict adaptation_helps(Experiments& ex)
{
    std::size_t lower = 0;
    std::size_t total = 0;
    for (const std::uint64_t seed : kSeeds) {
        for (const ResultRecord& r : ex.b(seed).records) {
            if (r.method != Method::ours) {
                continue;
            }
            for (std::size_t j = 0; j < r.support_nll_before.size(); ++j) {
                lower += r.support_nll_after[j] < r.support_nll_before[j] ? 1 : 0;
                ++total;
            }
        }
    }
    const double fraction = total == 0 ? 0.0 : static_cast<double>(lower) / static_cast<double>(total);
    return {fraction >= kDescentFraction,
            fmt("support NLL lower after the inner step for %zu/%zu sampled adaptations (%.1f%%, >= %.0f%%) on "
                "held-out robots of scenario b",
                lower, total, 100.0 * fraction, 100.0 * kDescentFraction)};
}

Verdict lambda_zero_identity(Experiments& ex)
{
    const ExperimentConfig& cfg = ex.config();
    const CanonicalModels& canonical = *ex.canonical(kSeeds.front()).canonical;
    std::vector<robotsim::RobotInstance> robots;
    for (const Platform p : robotsim::kPlatforms) {
        for (int i = 0; i < 3; ++i) {
            robots.push_back(robotsim::sample_robot(robotsim::platform_template(p),
                                                    stream_seed(606, std::to_string(i)) + robotsim::platform_index(p),
                                                    i));
        }
    }
    const auto tasks = to_tensors(build_tasks(robots, canonical, cfg, 606), canonical.vae.norm);

    metalearn::TrainConfig config = cfg.meta;
    config.epochs = 5;
    config.lambda_init = 0.0;
    config.freeze_lambda = true;
    config.seed = 606;
    metalearn::MetaModel ours = metalearn::init_meta_model(Method::ours, cfg.dims, canonical.vae, config);
    metalearn::MetaModel avi = metalearn::init_meta_model(Method::avi, cfg.dims, canonical.vae, config);
    const auto a = metalearn::meta_train(ours, tasks, config);
    const auto b = metalearn::meta_train(avi, tasks, config);
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i) {
        same = a[i].total == b[i].total && a[i].nll == b[i].nll && a[i].kl == b[i].kl;
    }
    same = same && ours.hypernet.net.params == avi.hypernet.net.params
           && ours.encoder.net.params == avi.encoder.net.params;
    // Meta-test on a novel robot: every sampled theta must agree too.
    const robotsim::RobotInstance novel = robotsim::sample_robot(
        robotsim::platform_template(Platform::baxter), stream_seed(606, "novel"), kTestRobotIndexBase);
    const metalearn::TaskTensors support = support_tensors(novel, canonical, cfg);
    const auto x = metalearn::meta_test(ours, support, config, 607);
    const auto y = metalearn::meta_test(avi, support, config, 607);
    same = same && x.size() == y.size();
    for (std::size_t j = 0; same && j < x.size(); ++j) {
        same = x[j].theta == y[j].theta;
    }
    return {same, fmt("%zu epochs on %zu tasks: per-epoch losses, parameters and %zu meta-test thetas %s", a.size(),
                      tasks.size(), x.size(), same ? "bit-identical" : "differ")};
}

Verdict scenario_b_direction(Experiments& ex)
{
    std::size_t worse = 0;
    std::string per_platform;
    for (const Platform p : robotsim::kPlatforms) {
        std::vector<double> in_a;
        std::vector<double> in_b;
        for (const std::uint64_t seed : kSeeds) {
            in_a.push_back(*platform_mean(ex.a(seed, p).records, Method::maml, p));
            in_b.push_back(*platform_mean(ex.b(seed).records, Method::maml, p));
        }
        const double ma = mean_of(in_a);
        const double mb = mean_of(in_b);
        worse += mb > ma ? 1 : 0;
        per_platform += fmt("%s%s %.2f->%.2f", per_platform.empty() ? "" : ", ",
                            robotsim::platform_name(p).data(), ma, mb);
    }

    std::size_t not_worse = 0;
    std::size_t robots = 0;
    for (const std::uint64_t seed : kSeeds) {
        const auto& records = ex.b(seed).records;
        for (const ResultRecord& ours : records) {
            if (ours.method != Method::ours) {
                continue;
            }
            const auto maml = std::find_if(records.begin(), records.end(), [&](const ResultRecord& r) {
                return r.method == Method::maml && r.robot == ours.robot;
            });
            if (maml != records.end()) {
                not_worse += ours.summary.mean <= maml->summary.mean ? 1 : 0;
                ++robots;
            }
        }
    }
    const double fraction = robots == 0 ? 0.0 : static_cast<double>(not_worse) / static_cast<double>(robots);
    const double t = ex.scenario_seconds();
    return {worse >= kMamlWorsePlatforms && fraction >= kOursNotWorseFraction && t <= kScenarioSeconds,
            fmt("MAML a->b error worse on %zu/4 platforms (>= %zu; %s cm); ours <= MAML on %zu/%zu scenario b "
                "robots (>= %.0f%%); %zu seeds, %.0fs (<= %.0fs)",
                worse, kMamlWorsePlatforms, per_platform.c_str(), not_worse, robots, 100.0 * kOursNotWorseFraction,
                kSeeds.size(), t, kScenarioSeconds)};
}

Verdict latent_separation(Experiments& ex)
{
    bool pass = true;
    std::vector<double> scores;
    std::vector<double> shuffled;
    for (const std::uint64_t seed : kSeeds) {
        const auto& rows = ex.b(seed).latents;
        scores.push_back(latent_separation_score(rows));
        shuffled.push_back(shuffled_separation_score(rows, kShuffles, seed));
        pass = pass && scores.back() >= kSeparationMin;
    }
    const double base = mean_of(shuffled);
    pass = pass && std::abs(base - kShuffledCentre) <= kShuffledTolerance;
    std::string per_seed;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        per_seed += fmt("%s%.3f", i == 0 ? "" : "/", scores[i]);
    }
    return {pass, fmt("1-NN platform accuracy %s per seed (>= %.2f); shuffled labels %.3f (%.2f +- %.2f)",
                      per_seed.c_str(), kSeparationMin, base, kShuffledCentre, kShuffledTolerance)};
}

Verdict injection(Experiments& ex)
{
    std::vector<double> none;
    std::vector<double> some;
    for (const std::uint64_t seed : kSeeds) {
        none.push_back(*platform_mean(ex.injection(seed, 0).records, Method::ours, Platform::baxter));
        some.push_back(*platform_mean(ex.injection(seed, kInjected).records, Method::ours, Platform::baxter));
    }
    const double m0 = mean_of(none);
    const double mk = mean_of(some);
    return {mk < m0, fmt("excluded platform baxter, ours: k=%zu %.2f cm vs k=0 %.2f cm, mean of %zu seeds",
                         kInjected, mk, m0, kSeeds.size())};
}

std::map<std::string, std::string> snapshot(const fs::path& root)
{
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            files[fs::relative(e.path(), root).string()] = pipeline::read_text(e.path());
        }
    }
    return files;
}

Verdict reproducibility(const fs::path& tiny_config, const fs::path& work)
{
    std::vector<std::map<std::string, std::string>> runs;
    for (const char* name : {"first", "second"}) {
        pipeline::RunConfig c = pipeline::load_config(tiny_config);
        pipeline::set_option(c, "scenario", "c+k");
        c.out = work / name;
        fs::remove_all(c.out);
        pipeline::cmd_gen_data(c);
        pipeline::cmd_train(c, "all");
        pipeline::cmd_evaluate(c);
        pipeline::cmd_export_latents(c);
        pipeline::cmd_report(c);
        runs.push_back(snapshot(c.out));
    }
    std::size_t datasets = 0;
    std::size_t checkpoints = 0;
    std::size_t results = 0;
    std::size_t differing = 0;
    for (const auto& [name, bytes] : runs[0]) {
        const auto other = runs[1].find(name);
        differing += (other == runs[1].end() || other->second != bytes) ? 1 : 0;
        datasets += name.starts_with("data") ? 1 : 0;
        checkpoints += name.starts_with("checkpoints") ? 1 : 0;
        results += name.starts_with("results") ? 1 : 0;
    }
    const bool pass = differing == 0 && runs[0].size() == runs[1].size() && datasets > 0 && checkpoints > 0
                      && results > 0;
    return {pass, fmt("two runs of the same config: %zu files (%zu datasets, %zu checkpoints, %zu result CSVs), "
                      "%zu differ",
                      runs[0].size(), datasets, checkpoints, results, differing)};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria"};
    fs::path profile_path;
    fs::path tiny_path;
    fs::path work = fs::temp_directory_path() / "hyperadapt-acceptance";
    std::vector<int> only;
    app.add_option("--config", profile_path, "Experiment profile")->required()->check(CLI::ExistingFile);
    app.add_option("--tiny", tiny_path, "Small profile for the reproducibility run")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--work", work, "Scratch directory");
    app.add_option("--only", only, "Criteria to run (default: all)")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    const pipeline::RunConfig profile = pipeline::load_config(profile_path);
    Experiments ex(profile);

    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"autodiff correctness", autodiff_correctness},
        {"kinematics oracle", kinematics_oracle},
        {"consistent end states", [&] { return consistency(profile.experiment); }},
        {"VAE and sub-policy quality", [&] { return vae_quality(ex); }},
        {"adaptation lowers support NLL", [&] { return adaptation_helps(ex); }},
        {"lambda = 0 equals AVI", [&] { return lambda_zero_identity(ex); }},
        {"scenario b direction", [&] { return scenario_b_direction(ex); }},
        {"latent separation", [&] { return latent_separation(ex); }},
        {"task injection", [&] { return injection(ex); }},
        {"reproducibility", [&] { return reproducibility(tiny_path, work); }},
    };

    const std::set<int> selected(only.begin(), only.end());
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!selected.empty() && !selected.contains(id)) {
            continue;
        }
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), v.detail.c_str());
        std::fflush(stdout);
        failed += v.pass ? 0 : 1;
    }
    fs::remove_all(work);
    return failed == 0 ? 0 : 1;
}
