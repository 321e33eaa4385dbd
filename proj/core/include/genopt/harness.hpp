#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "genopt/gen.hpp"
#include "genopt/optim.hpp"
#include "genopt/problems.hpp"

namespace genopt {

enum class ProblemKind { rosenbrock, beale, quadratic, logistic, cubic };

struct ProblemSpec {
    ProblemKind kind = ProblemKind::rosenbrock;
    // quadratic
    std::vector<std::vector<double>> matrix;
    std::vector<double> offset;
    // logistic
    std::size_t samples = 1000;
    std::size_t features = 10;
    double l2_penalty = 0.0;
    std::uint64_t data_seed = 0;
    double label_noise = 0.05;
    // cubic
    std::vector<double> linear, quadratic, cubic;

    [[nodiscard]] std::size_t dimension() const;
};

enum class OptimizerKind { sgd, adamw };

struct OptimizerSpec {
    OptimizerKind kind = OptimizerKind::sgd;
    /// Constant learning rate; ignored when GeN drives the run.
    double lr = 1e-3;
    double momentum = 0.0;
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    PostProcessor post = Identity{};
};

struct ExperimentSpec {
    std::string name = "experiment";
    ProblemSpec problem;
    OptimizerSpec optimizer;
    std::optional<GenSettings> gen;
    ParamVector start_point;
    std::size_t iterations = 1000;
    std::uint64_t seed = 0;
    std::size_t log_every = 1;
    /// Mini-batch size for stochastic problems; 0 means full data.
    std::size_t batch_size = 0;

    /// Throws InvalidArgument when the experiment cannot be run.
    void validate() const;
};

[[nodiscard]] std::unique_ptr<Objective> make_problem(const ProblemSpec& spec);
[[nodiscard]] BaseOptimizer make_optimizer(const OptimizerSpec& spec, std::size_t dim);

/// Documented default starts for the 2-D benchmark functions.
[[nodiscard]] ParamVector default_start(ProblemKind kind);

/// Loss above this (or non-finite) marks a run as diverged.
inline constexpr double kDivergenceLoss = 1e12;

struct RunResult {
    /// Logged records, ordered by step. The last executed step is always logged.
    std::vector<StepRecord> records;
    /// w_0, w_1, … for every executed iteration.
    std::vector<ParamVector> iterates;
    ParamVector final_w;
    double final_loss = 0.0;
    StepStatus status = StepStatus::ok;
    std::size_t fit_attempts = 0;
    std::chrono::nanoseconds wall_time{0};
};

/// Runs loss → direction → optional GeN update → step for spec.iterations
/// iterations. Each record's loss is the full-data loss after its step. A
/// non-finite or huge loss halts the run with status `diverged`.
[[nodiscard]] RunResult run_experiment(const ExperimentSpec& spec);

/// Runs independent experiments on up to `jobs` threads; results are in
/// input order.
[[nodiscard]] std::vector<RunResult> run_experiments(const std::vector<ExperimentSpec>& specs, std::size_t jobs);

/// {1, 2, 5}·10^-k for k = 5 … 0, ascending (18 values).
[[nodiscard]] std::vector<double> baseline_grid();

struct GridPoint {
    double eta = 0.0;
    double final_loss = 0.0;
    StepStatus status = StepStatus::ok;
};

struct GridSearchResult {
    std::vector<GridPoint> table;
    double best_eta = 0.0;
    double best_final_loss = 0.0;
};

/// Runs `base` with every grid learning rate (GeN must be off) and picks the
/// smallest final loss among non-diverged runs, ties to the smaller eta.
/// Throws Error when every run diverges.
[[nodiscard]] GridSearchResult grid_search_baseline(const ExperimentSpec& base, std::size_t jobs = 1);

struct ErrorScalingRow {
    std::size_t batch_size = 0;
    std::size_t samples = 0;  ///< trials that produced a candidate
    double mean_eta = 0.0;
    double std_eta = 0.0;
};

struct ErrorScalingResult {
    std::vector<ErrorScalingRow> rows;
    /// Least-squares slope of log(std) against log(B).
    double slope = 0.0;
    double eta_prev = 0.0;
};

struct ErrorScalingOptions {
    /// Evaluation point; zeros when absent.
    std::optional<ParamVector> w;
    /// Fixed update direction; the full-data gradient at w when absent.
    std::optional<ParamVector> direction;
    /// Probe spacing; the full-data exact eta* along the direction when absent.
    std::optional<double> eta_prev;
};

/// For each B draws `trials` batches and evaluates the mini-batch losses
/// (L0, L at w ∓ eta_prev·direction) on each, recording the 3-point eta
/// candidate. The direction stays fixed, so only the losses are sub-sampled.
/// B ≥ dataset size uses the full data.
[[nodiscard]] ErrorScalingResult error_scaling_study(const LogisticRegressionProblem& problem,
                                                     const std::vector<std::size_t>& batch_sizes,
                                                     std::size_t trials, std::uint64_t seed,
                                                     const ErrorScalingOptions& options = {});

struct ConvergenceMetrics {
    /// First t with ‖w_t − w*‖ ≤ tolerance; absent if never reached or the run diverged.
    std::optional<std::size_t> iters_to_tol;
    /// ‖e_{t+1}‖ / ‖e_t‖² while ‖e_t‖ > 0.
    std::vector<double> error_ratios;
    std::vector<double> errors;
};

inline constexpr double kConvergenceTolerance = 1e-6;

[[nodiscard]] ConvergenceMetrics convergence_metrics(const RunResult& result, const ParamVector& optimum,
                                                     double tolerance = kConvergenceTolerance);

/// Slope of the least-squares line through (log x, log y).
[[nodiscard]] double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

/// SplitMix64 finalizer, used to derive per-step and per-trial seeds.
[[nodiscard]] std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace genopt
