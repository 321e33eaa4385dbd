#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "genopt/vector.hpp"

namespace genopt {

/// Heavy-ball SGD with coupled weight decay.
struct SgdState {
    double momentum = 0.0;
    double weight_decay = 0.0;
    ParamVector velocity;

    /// Throws InvalidArgument unless momentum ∈ [0, 1) and weight_decay ≥ 0.
    static SgdState make(std::size_t dim, double momentum = 0.0, double weight_decay = 0.0);
};

/// AdamW moment estimates with decoupled weight decay.
struct AdamWState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.0;
    ParamVector m;
    ParamVector v;
    std::size_t step_count = 0;

    static AdamWState make(std::size_t dim, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8,
                           double weight_decay = 0.0);
};

/// effective = raw_grad + weight_decay·w; velocity ← momentum·velocity + effective.
/// Returns the new velocity.
[[nodiscard]] ParamVector sgd_direction(SgdState& state, const ParamVector& raw_grad, const ParamVector& w);

/// Bias-corrected m̂ / (√v̂ + ε) + weight_decay·w.
[[nodiscard]] ParamVector adamw_direction(AdamWState& state, const ParamVector& raw_grad, const ParamVector& w);

struct Identity {};
/// Elementwise sign with sign(0) = 0.
struct SignSgd {};
struct ClipToNorm {
    double max_norm = 1.0;
};
struct Mask {
    std::vector<bool> keep;
};

using PostProcessor = std::variant<Identity, SignSgd, ClipToNorm, Mask>;

[[nodiscard]] ParamVector post_process(const PostProcessor& pp, const ParamVector& g);

/// w − eta·direction.
[[nodiscard]] ParamVector apply_step(const ParamVector& w, double eta, const ParamVector& direction);

/// A base optimizer: gradient post-processing followed by SGD or AdamW state.
///
/// The post-processor runs on the raw gradient. A Mask is applied once more
/// to the final direction so that frozen coordinates never move, even under
/// weight decay.
class BaseOptimizer {
public:
    using State = std::variant<SgdState, AdamWState>;

    BaseOptimizer(State state, PostProcessor post = Identity{});

    [[nodiscard]] ParamVector direction(const ParamVector& raw_grad, const ParamVector& w);

    [[nodiscard]] const State& state() const noexcept { return state_; }
    [[nodiscard]] const PostProcessor& post_processor() const noexcept { return post_; }
    [[nodiscard]] std::string name() const;

private:
    State state_;
    PostProcessor post_;
};

}  // namespace genopt
