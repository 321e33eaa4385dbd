#include <cmath>

#include <gtest/gtest.h>

#include "genopt/harness.hpp"
#include "support/oracles.hpp"

using genopt::ParamVector;

namespace {

genopt::ExperimentSpec quadratic_spec(std::vector<std::vector<double>> a, std::vector<double> offset, ParamVector start) {
    genopt::ExperimentSpec s;
    s.name = "quad";
    s.problem.kind = genopt::ProblemKind::quadratic;
    s.problem.matrix = std::move(a);
    s.problem.offset = std::move(offset);
    s.start_point = std::move(start);
    return s;
}

genopt::GenSettings exact_settings() {
    genopt::GenSettings g;
    g.gamma = 0.0;
    g.phi = 1;
    return g;
}

}  // namespace

TEST(RunExperiment, OneGenStepAchievesQuadraticModelDrop) {
    auto s = quadratic_spec({{2, 0}, {0, 8}}, {0, 0}, ParamVector{1, 1});
    s.gen = exact_settings();
    s.gen->eta0 = 0.1;
    s.iterations = 1;
    const auto r = genopt::run_experiment(s);
    ASSERT_EQ(r.records.size(), 1u);
    const double want = 5.0 - 68.0 * 68.0 / (2.0 * 520.0);
    EXPECT_NEAR(r.records[0].loss, want, 1e-12);
    EXPECT_EQ(r.final_loss, r.records[0].loss);
}

TEST(RunExperiment, IterationContract) {
    auto s = quadratic_spec({{1, 0}, {0, 1}}, {0, 0}, ParamVector{1, 1});
    s.iterations = 0;
    EXPECT_THROW((void)genopt::run_experiment(s), genopt::InvalidArgument);
    s.iterations = 1;
    EXPECT_EQ(genopt::run_experiment(s).records.size(), 1u);
    s.iterations = 10;
    s.log_every = 3;
    const auto r = genopt::run_experiment(s);
    ASSERT_EQ(r.records.size(), 4u);
    EXPECT_EQ(r.records.back().step, 10u);
    for (std::size_t i = 1; i < r.records.size(); ++i) EXPECT_LT(r.records[i - 1].step, r.records[i].step);
    EXPECT_EQ(r.iterates.size(), 11u);
}

TEST(RunExperiment, StartPointDimensionChecked) {
    auto s = quadratic_spec({{1, 0}, {0, 1}}, {0, 0}, ParamVector{1, 1, 1});
    EXPECT_THROW((void)genopt::run_experiment(s), genopt::InvalidArgument);
}

TEST(RunExperiment, DeterministicIncludingMiniBatches) {
    genopt::ExperimentSpec s;
    s.problem.kind = genopt::ProblemKind::logistic;
    s.problem.samples = 300;
    s.problem.features = 4;
    s.problem.data_seed = 5;
    s.start_point = ParamVector::zeros(4);
    s.batch_size = 32;
    s.seed = 99;
    s.iterations = 50;
    s.gen = genopt::GenSettings{};
    s.gen->phi = 2;
    const auto a = genopt::run_experiment(s);
    const auto b = genopt::run_experiment(s);
    EXPECT_EQ(a.records, b.records);
    EXPECT_EQ(a.final_w, b.final_w);
    s.seed = 100;
    EXPECT_NE(genopt::run_experiment(s).records, a.records);
}

TEST(RunExperiment, DivergenceIsRecordedNotThrown) {
    genopt::ExperimentSpec s;
    s.problem.kind = genopt::ProblemKind::rosenbrock;
    s.start_point = genopt::default_start(genopt::ProblemKind::rosenbrock);
    s.optimizer.lr = 1.0;
    s.iterations = 100;
    const auto r = genopt::run_experiment(s);
    EXPECT_EQ(r.status, genopt::StepStatus::diverged);
    EXPECT_EQ(r.records.back().status, genopt::StepStatus::diverged);
    EXPECT_LT(r.records.back().step, 100u);
    EXPECT_FALSE(genopt::convergence_metrics(r, ParamVector{1, 1}).iters_to_tol.has_value());
}

TEST(RunExperiments, ParallelMatchesSerial) {
    std::vector<genopt::ExperimentSpec> specs;
    for (double lr : {1e-4, 1e-3, 2e-3}) {
        genopt::ExperimentSpec s;
        s.problem.kind = genopt::ProblemKind::rosenbrock;
        s.start_point = genopt::default_start(genopt::ProblemKind::rosenbrock);
        s.optimizer.lr = lr;
        s.iterations = 200;
        specs.push_back(s);
    }
    const auto serial = genopt::run_experiments(specs, 1);
    const auto parallel = genopt::run_experiments(specs, 3);
    for (std::size_t i = 0; i < specs.size(); ++i) EXPECT_EQ(serial[i].records, parallel[i].records);
}

TEST(GridSearch, GridHasEighteenAscendingValues) {
    const auto g = genopt::baseline_grid();
    ASSERT_EQ(g.size(), 18u);
    EXPECT_DOUBLE_EQ(g.front(), 1e-5);
    EXPECT_DOUBLE_EQ(g.back(), 5.0);
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_LT(g[i - 1], g[i]);
}

TEST(GridSearch, IdentityQuadraticPicksOne) {
    auto s = quadratic_spec({{1, 0}, {0, 1}}, {0, 0}, ParamVector{3, -2});
    s.iterations = 100;
    const auto r = genopt::grid_search_baseline(s, 4);
    EXPECT_EQ(r.best_eta, 1.0);
    EXPECT_EQ(r.best_final_loss, 0.0);
    EXPECT_EQ(r.table.size(), 18u);
    auto again = s;
    again.optimizer.lr = r.best_eta;
    EXPECT_EQ(genopt::run_experiment(again).final_loss, r.best_final_loss);
}

TEST(GridSearch, RejectsGenAndAllDiverged) {
    auto s = quadratic_spec({{1, 0}, {0, 1}}, {0, 0}, ParamVector{3, -2});
    s.gen = genopt::GenSettings{};
    EXPECT_THROW((void)genopt::grid_search_baseline(s), genopt::InvalidArgument);
    auto stiff = quadratic_spec({{1e7, 0}, {0, 1e7}}, {0, 0}, ParamVector{3, -2});
    stiff.iterations = 200;
    EXPECT_THROW((void)genopt::grid_search_baseline(stiff), genopt::Error);
}

TEST(ErrorScaling, FullBatchHasNoSpread) {
    const auto p = genopt::generate_dataset(3, 200, 5, 0.0);
    const auto r = genopt::error_scaling_study(p, {32, 200}, 50, 1);
    ASSERT_EQ(r.rows.size(), 2u);
    EXPECT_GT(r.rows[0].std_eta, 0.0);
    EXPECT_EQ(r.rows[1].std_eta, 0.0);
    EXPECT_EQ(r.rows[1].samples, 50u);
}

TEST(ErrorScaling, StdIsStableUnderMoreTrials) {
    const auto p = genopt::generate_dataset(3, 2000, 5, 0.0);
    const auto a = genopt::error_scaling_study(p, {64}, 200, 7);
    const auto b = genopt::error_scaling_study(p, {64}, 400, 8);
    const double s = a.rows[0].std_eta;
    // Standard error of a sample standard deviation is about s / sqrt(2(n - 1)).
    const double se = s / std::sqrt(2.0 * 199.0);
    EXPECT_LE(std::abs(b.rows[0].std_eta - s), 2.0 * std::sqrt(se * se + se * se / 2.0) * 1.5);
}

TEST(ConvergenceMetrics, StartAtOptimumAndNewtonOnQuadratic) {
    auto s = quadratic_spec({{2, 0}, {0, 3}}, {1, -1}, ParamVector{1, -1});
    s.iterations = 3;
    EXPECT_EQ(genopt::convergence_metrics(genopt::run_experiment(s), ParamVector{1, -1}).iters_to_tol, 0u);

    // Newton direction with the exact estimator reaches the minimizer in one step.
    const auto q = genopt::QuadraticProblem::random(6, 17);
    genopt::GenSettings g = exact_settings();
    g.estimator = genopt::Estimator::exact_hvp;
    g.clamp_ratio = 0.0;
    g.eta0 = 0.3;
    genopt::GenController ctrl(g);
    genopt::RunResult run;
    ParamVector w = ParamVector::zeros(6);
    run.iterates.push_back(w);
    for (int t = 0; t < 3; ++t) {
        const ParamVector grad = q.grad(w, genopt::FullData{});
        if (grad.is_zero()) break;
        const ParamVector dir = q.solve(grad);
        (void)ctrl.update(q, w, dir, genopt::FullData{}, q.loss(w, genopt::FullData{}), &grad);
        w = genopt::apply_step(w, ctrl.eta(), dir);
        run.iterates.push_back(w);
    }
    const auto m = genopt::convergence_metrics(run, q.offset());
    ASSERT_TRUE(m.iters_to_tol.has_value());
    EXPECT_LE(*m.iters_to_tol, 1u);
}

TEST(LogLogSlope, RecoversPowerLaw) {
    EXPECT_NEAR(genopt::log_log_slope({1, 10, 100}, {3, 0.3, 0.03}), -1.0, 1e-12);
    EXPECT_NEAR(genopt::log_log_slope({2, 4, 8, 16}, {4, 16, 64, 256}), 2.0, 1e-12);
}

TEST(MixSeed, DistinctAndStable) {
    EXPECT_EQ(genopt::mix_seed(1, 2), genopt::mix_seed(1, 2));
    EXPECT_NE(genopt::mix_seed(1, 2), genopt::mix_seed(2, 1));
    EXPECT_NE(genopt::mix_seed(0, 0), genopt::mix_seed(0, 1));
}
