#include "genopt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace genopt {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::size_t ProblemSpec::dimension() const {
    switch (kind) {
        case ProblemKind::rosenbrock:
        case ProblemKind::beale: return 2;
        case ProblemKind::quadratic: return offset.size();
        case ProblemKind::logistic: return features;
        case ProblemKind::cubic: return linear.size();
    }
    return 0;
}

std::unique_ptr<Objective> make_problem(const ProblemSpec& spec) {
    switch (spec.kind) {
        case ProblemKind::rosenbrock: return std::make_unique<RosenbrockProblem>();
        case ProblemKind::beale: return std::make_unique<BealeProblem>();
        case ProblemKind::quadratic: {
            const auto d = static_cast<Eigen::Index>(spec.offset.size());
            if (static_cast<Eigen::Index>(spec.matrix.size()) != d) {
                throw InvalidArgument("quadratic: matrix rows must match offset length");
            }
            Eigen::MatrixXd a(d, d);
            for (Eigen::Index i = 0; i < d; ++i) {
                const auto& row = spec.matrix[static_cast<std::size_t>(i)];
                if (static_cast<Eigen::Index>(row.size()) != d) {
                    throw InvalidArgument("quadratic: matrix must be square");
                }
                for (Eigen::Index j = 0; j < d; ++j) a(i, j) = row[static_cast<std::size_t>(j)];
            }
            return std::make_unique<QuadraticProblem>(std::move(a), ParamVector(spec.offset));
        }
        case ProblemKind::logistic:
            return std::make_unique<LogisticRegressionProblem>(generate_dataset(
                spec.data_seed, spec.samples, spec.features, spec.l2_penalty, spec.label_noise));
        case ProblemKind::cubic:
            return std::make_unique<CubicProblem>(spec.linear, spec.quadratic, spec.cubic);
    }
    throw InvalidArgument("unknown problem kind");
}

BaseOptimizer make_optimizer(const OptimizerSpec& spec, std::size_t dim) {
    if (spec.kind == OptimizerKind::sgd) {
        return BaseOptimizer(SgdState::make(dim, spec.momentum, spec.weight_decay), spec.post);
    }
    return BaseOptimizer(AdamWState::make(dim, spec.beta1, spec.beta2, spec.epsilon, spec.weight_decay), spec.post);
}

ParamVector default_start(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::rosenbrock: return ParamVector{-1.5, 2.0};
        case ProblemKind::beale: return ParamVector{-2.0, -2.0};
        default: break;
    }
    throw InvalidArgument("default_start: only defined for rosenbrock and beale");
}

void ExperimentSpec::validate() const {
    if (iterations < 1) throw InvalidArgument(name + ": iterations must be >= 1");
    if (log_every < 1) throw InvalidArgument(name + ": log_every must be >= 1");
    if (start_point.size() != problem.dimension()) {
        throw InvalidArgument(name + ": start_point has dimension " + std::to_string(start_point.size()) +
                              ", problem expects " + std::to_string(problem.dimension()));
    }
    if (!(optimizer.lr > 0.0) || !std::isfinite(optimizer.lr)) {
        throw InvalidArgument(name + ": lr must be finite and > 0");
    }
    if (gen) gen->validate();
    if (const auto* mask = std::get_if<Mask>(&optimizer.post); mask && mask->keep.size() != start_point.size()) {
        throw InvalidArgument(name + ": mask length must equal the parameter dimension");
    }
}

RunResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const auto started = std::chrono::steady_clock::now();
    const auto objective = make_problem(spec.problem);
    const Objective& obj = *objective;
    BaseOptimizer optimizer = make_optimizer(spec.optimizer, obj.dimension());
    std::optional<GenController> ctrl;
    if (spec.gen) ctrl.emplace(*spec.gen);

    RunResult result;
    ParamVector w = spec.start_point;
    double eta = ctrl ? ctrl->eta() : spec.optimizer.lr;
    result.iterates.push_back(w);
    result.final_loss = obj.loss(w, FullData{});

    for (std::size_t t = 1; t <= spec.iterations; ++t) {
        BatchSelector batch = FullData{};
        if (spec.batch_size > 0 && obj.dataset_size() > 0) {
            batch = SyntheticNoise{mix_seed(spec.seed, t), spec.batch_size};
        }

        StepRecord rec;
        rec.step = t;
        try {
            const double l0 = obj.loss(w, batch);
            if (!std::isfinite(l0)) throw NonFiniteValue("loss");
            const ParamVector raw = obj.grad(w, batch);
            rec.grad_norm = raw.norm();
            const ParamVector dir = optimizer.direction(raw, w);
            if (ctrl) {
                if (t == 1 && ctrl->settings().auto_eta0 && !dir.is_zero()) {
                    ctrl->reset_eta(auto_search_eta0(obj, w, dir, batch));
                }
                const GenOutcome o = ctrl->update(obj, w, dir, batch, l0, &raw);
                eta = o.eta;
                rec.eta_candidate = o.eta_candidate;
                rec.fit_accepted = o.accepted;
                rec.fit_r2 = o.r2;
            }
            rec.eta = eta;
            w = apply_step(w, eta, dir);
            rec.loss = obj.loss(w, FullData{});
        } catch (const NonFiniteValue&) {
            rec.eta = eta;
            rec.loss = std::numeric_limits<double>::infinity();
        }
        if (!std::isfinite(rec.loss) || rec.loss > kDivergenceLoss) {
            rec.status = StepStatus::diverged;
        }

        result.final_loss = rec.loss;
        if (rec.status == StepStatus::ok) result.iterates.push_back(w);
        if (t % spec.log_every == 0 || t == spec.iterations || rec.status == StepStatus::diverged) {
            result.records.push_back(rec);
        }
        if (rec.status == StepStatus::diverged) {
            result.status = StepStatus::diverged;
            break;
        }
    }
    result.final_w = w;
    result.fit_attempts = ctrl ? ctrl->fit_attempts() : 0;
    result.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - started);
    return result;
}

std::vector<RunResult> run_experiments(const std::vector<ExperimentSpec>& specs, std::size_t jobs) {
    std::vector<RunResult> results(specs.size());
    std::vector<std::exception_ptr> errors(specs.size());
    const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, specs.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < specs.size(); i = next++) {
            try {
                results[i] = run_experiment(specs[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(work);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

std::vector<double> baseline_grid() {
    std::vector<double> grid;
    for (int k = 5; k >= 0; --k) {
        const double scale = std::pow(10.0, -k);
        for (double m : {1.0, 2.0, 5.0}) grid.push_back(m * scale);
    }
    return grid;
}

GridSearchResult grid_search_baseline(const ExperimentSpec& base, std::size_t jobs) {
    if (base.gen) {
        throw InvalidArgument(base.name + ": grid search needs a constant-learning-rate baseline (gen must be off)");
    }
    const auto grid = baseline_grid();
    std::vector<ExperimentSpec> specs(grid.size(), base);
    for (std::size_t i = 0; i < grid.size(); ++i) specs[i].optimizer.lr = grid[i];
    const auto runs = run_experiments(specs, jobs);

    GridSearchResult out;
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out.table.push_back({grid[i], runs[i].final_loss, runs[i].status});
        if (runs[i].status != StepStatus::ok) continue;
        if (!best || runs[i].final_loss < runs[*best].final_loss) best = i;
    }
    if (!best) {
        throw Error(base.name + ": every grid learning rate diverged (" + std::to_string(grid.size()) +
                    " runs, smallest eta " + std::to_string(grid.front()) + ")");
    }
    out.best_eta = grid[*best];
    out.best_final_loss = runs[*best].final_loss;
    return out;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw InvalidArgument("log_log_slope: need at least two paired points");
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

ErrorScalingResult error_scaling_study(const LogisticRegressionProblem& problem,
                                       const std::vector<std::size_t>& batch_sizes, std::size_t trials,
                                       std::uint64_t seed, const ErrorScalingOptions& options) {
    if (batch_sizes.empty()) throw InvalidArgument("error_scaling_study: no batch sizes");
    if (trials < 2) throw InvalidArgument("error_scaling_study: need at least 2 trials");

    const ParamVector w = options.w ? *options.w : ParamVector::zeros(problem.dimension());
    const ParamVector full_grad = problem.grad(w, FullData{});
    const ParamVector dir = options.direction ? *options.direction : full_grad;
    require_same_dim(w, dir);
    if (dir.is_zero()) throw InvalidArgument("error_scaling_study: direction must be non-zero");
    double eta_prev = 0.0;
    if (options.eta_prev) {
        eta_prev = *options.eta_prev;
    } else {
        const auto exact = exact_eta_hvp(problem, w, full_grad, dir, FullData{});
        if (!exact || !(*exact > 0.0)) throw Error("error_scaling_study: full-data eta* is not positive at w");
        eta_prev = *exact;
    }
    if (!(eta_prev > 0.0) || !std::isfinite(eta_prev)) throw InvalidArgument("error_scaling_study: eta_prev must be > 0");

    ErrorScalingResult out;
    out.eta_prev = eta_prev;
    std::vector<double> bs, stds;
    for (std::size_t b : batch_sizes) {
        if (b == 0) throw InvalidArgument("error_scaling_study: batch size must be >= 1");
        std::vector<double> etas;
        etas.reserve(trials);
        for (std::size_t k = 0; k < trials; ++k) {
            BatchSelector batch = FullData{};
            if (b < problem.dataset_size()) batch = SyntheticNoise{mix_seed(mix_seed(seed, b), k), b};
            const auto probes = probe_losses(problem, w, dir, eta_prev, batch, 3);
            if (const auto cand = fit_quadratic(probes).eta_candidate()) etas.push_back(*cand);
        }
        ErrorScalingRow row;
        row.batch_size = b;
        row.samples = etas.size();
        if (etas.size() >= 2) {
            // Shifted by the first sample so identical samples give exactly zero spread.
            const double n = static_cast<double>(etas.size());
            const double shift = etas.front();
            double sum = 0.0;
            for (double e : etas) sum += e - shift;
            const double mean_dev = sum / n;
            double ss = 0.0;
            for (double e : etas) ss += (e - shift - mean_dev) * (e - shift - mean_dev);
            row.mean_eta = shift + mean_dev;
            row.std_eta = std::sqrt(ss / (n - 1.0));
        }
        out.rows.push_back(row);
        if (row.std_eta > 0.0) {
            bs.push_back(static_cast<double>(b));
            stds.push_back(row.std_eta);
        }
    }
    out.slope = bs.size() >= 2 ? log_log_slope(bs, stds) : std::numeric_limits<double>::quiet_NaN();
    return out;
}

ConvergenceMetrics convergence_metrics(const RunResult& result, const ParamVector& optimum, double tolerance) {
    ConvergenceMetrics m;
    for (const auto& w : result.iterates) m.errors.push_back(distance(w, optimum));
    for (std::size_t t = 0; result.status == StepStatus::ok && t < m.errors.size(); ++t) {
        if (m.errors[t] <= tolerance) {
            m.iters_to_tol = t;
            break;
        }
    }
    for (std::size_t t = 0; t + 1 < m.errors.size(); ++t) {
        if (m.errors[t] == 0.0) break;
        m.error_ratios.push_back(m.errors[t + 1] / (m.errors[t] * m.errors[t]));
    }
    return m;
}

}  // namespace genopt
