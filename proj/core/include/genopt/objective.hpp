#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "genopt/vector.hpp"

namespace genopt {

/// Evaluate on every sample (or on the deterministic function itself).
struct FullData {
    friend bool operator==(const FullData&, const FullData&) = default;
};

/// Evaluate on an explicit, duplicate-free list of sample indices.
struct IndexSet {
    std::vector<std::size_t> indices;
    friend bool operator==(const IndexSet&, const IndexSet&) = default;
};

/// Evaluate on `batch_size` samples drawn i.i.d. (with replacement) from a
/// generator seeded with `seed`. Deterministic given the pair.
struct SyntheticNoise {
    std::uint64_t seed = 0;
    std::size_t batch_size = 1;
    friend bool operator==(const SyntheticNoise&, const SyntheticNoise&) = default;
};

using BatchSelector = std::variant<FullData, IndexSet, SyntheticNoise>;

/// Resolves a selector into the concrete sample indices for a dataset of
/// `dataset_size` samples. Throws InvalidArgument on out-of-range or
/// duplicated IndexSet entries and on an empty selection.
[[nodiscard]] std::vector<std::size_t> resolve_batch(const BatchSelector& batch, std::size_t dataset_size);

/// Loss / gradient oracle.
///
/// Implementations must be reentrant: every method is const and may be called
/// concurrently. `loss` may return a non-finite value for wild inputs; callers
/// decide whether that means rejection or divergence. `grad` throws
/// NonFiniteValue instead.
class Objective {
public:
    virtual ~Objective() = default;

    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual std::size_t dimension() const = 0;

    [[nodiscard]] virtual double loss(const ParamVector& w, const BatchSelector& batch) const = 0;
    [[nodiscard]] virtual ParamVector grad(const ParamVector& w, const BatchSelector& batch) const = 0;

    [[nodiscard]] virtual bool has_exact_hessian() const { return false; }
    [[nodiscard]] virtual bool has_hvp() const { return has_exact_hessian(); }

    /// Throws Error when the objective has no exact Hessian.
    [[nodiscard]] virtual Eigen::MatrixXd hessian(const ParamVector& w, const BatchSelector& batch) const;

    /// H(w)·v. Defaults to multiplying the exact Hessian.
    [[nodiscard]] virtual ParamVector hvp(const ParamVector& w, const ParamVector& v,
                                          const BatchSelector& batch) const;

    /// Known minimizer, if any.
    [[nodiscard]] virtual std::optional<ParamVector> optimum() const { return std::nullopt; }

    /// Number of samples for stochastic objectives; 0 for deterministic ones.
    [[nodiscard]] virtual std::size_t dataset_size() const { return 0; }

    void require_dim(const ParamVector& w) const;
};

enum class StepStatus { ok, diverged };

[[nodiscard]] const char* to_string(StepStatus s);

/// One logged iteration of an optimization run.
struct StepRecord {
    std::size_t step = 0;
    double loss = 0.0;
    double eta = 0.0;
    std::optional<double> eta_candidate;
    bool fit_accepted = false;
    std::optional<double> fit_r2;
    double grad_norm = 0.0;
    StepStatus status = StepStatus::ok;

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

}  // namespace genopt
