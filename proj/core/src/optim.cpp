#include "genopt/optim.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

namespace genopt {

SgdState SgdState::make(std::size_t dim, double momentum, double weight_decay) {
    if (!(momentum >= 0.0 && momentum < 1.0)) {
        throw InvalidArgument("sgd: momentum must lie in [0, 1)");
    }
    if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
        throw InvalidArgument("sgd: weight_decay must be finite and >= 0");
    }
    return {momentum, weight_decay, ParamVector::zeros(dim)};
}

AdamWState AdamWState::make(std::size_t dim, double beta1, double beta2, double epsilon, double weight_decay) {
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw InvalidArgument("adamw: betas must lie in [0, 1)");
    }
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw InvalidArgument("adamw: epsilon must be finite and > 0");
    }
    if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
        throw InvalidArgument("adamw: weight_decay must be finite and >= 0");
    }
    return {beta1, beta2, epsilon, weight_decay, ParamVector::zeros(dim), ParamVector::zeros(dim), 0};
}

ParamVector sgd_direction(SgdState& state, const ParamVector& raw_grad, const ParamVector& w) {
    require_same_dim(raw_grad, w);
    require_same_dim(state.velocity, w);
    const ParamVector effective = axpy(state.weight_decay, w, raw_grad);
    state.velocity = axpy(state.momentum, state.velocity, effective);
    return state.velocity;
}

ParamVector adamw_direction(AdamWState& state, const ParamVector& raw_grad, const ParamVector& w) {
    require_same_dim(raw_grad, w);
    require_same_dim(state.m, w);
    require_same_dim(state.v, w);
    const Eigen::VectorXd& g = raw_grad.eigen();
    state.m = ParamVector(Eigen::VectorXd(state.beta1 * state.m.eigen() + (1.0 - state.beta1) * g));
    state.v = ParamVector(
        Eigen::VectorXd(state.beta2 * state.v.eigen() + (1.0 - state.beta2) * g.cwiseProduct(g)));
    ++state.step_count;

    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);
    const Eigen::VectorXd m_hat = state.m.eigen() / bc1;
    const Eigen::VectorXd v_hat = state.v.eigen() / bc2;
    Eigen::VectorXd dir = m_hat.array() / (v_hat.array().sqrt() + state.epsilon);
    dir += state.weight_decay * w.eigen();
    return ParamVector(std::move(dir));
}

ParamVector post_process(const PostProcessor& pp, const ParamVector& g) {
    if (std::holds_alternative<Identity>(pp)) {
        return g;
    }
    if (std::holds_alternative<SignSgd>(pp)) {
        Eigen::VectorXd s = g.eigen().unaryExpr([](double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); });
        return ParamVector(std::move(s));
    }
    if (const auto* clip = std::get_if<ClipToNorm>(&pp)) {
        if (!(clip->max_norm > 0.0)) {
            throw InvalidArgument("clip: max_norm must be > 0");
        }
        const double n = g.norm();
        if (n == 0.0) {
            return g;
        }
        return scaled(std::min(clip->max_norm / n, 1.0), g);
    }
    const auto& mask = std::get<Mask>(pp);
    if (mask.keep.size() != g.size()) {
        throw DimensionMismatch(g.size(), mask.keep.size());
    }
    Eigen::VectorXd out = g.eigen();
    for (std::size_t i = 0; i < mask.keep.size(); ++i) {
        if (!mask.keep[i]) out[static_cast<Eigen::Index>(i)] = 0.0;
    }
    return ParamVector(std::move(out));
}

ParamVector apply_step(const ParamVector& w, double eta, const ParamVector& direction) {
    return axpy(-eta, direction, w);
}

BaseOptimizer::BaseOptimizer(State state, PostProcessor post) : state_(std::move(state)), post_(std::move(post)) {}

ParamVector BaseOptimizer::direction(const ParamVector& raw_grad, const ParamVector& w) {
    const ParamVector g = post_process(post_, raw_grad);
    ParamVector dir = std::visit(
        [&](auto& s) -> ParamVector {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, SgdState>) {
                return sgd_direction(s, g, w);
            } else {
                return adamw_direction(s, g, w);
            }
        },
        state_);
    if (std::holds_alternative<Mask>(post_)) {
        dir = post_process(post_, dir);
    }
    return dir;
}

std::string BaseOptimizer::name() const {
    std::string base = std::holds_alternative<SgdState>(state_) ? "sgd" : "adamw";
    if (std::holds_alternative<SignSgd>(post_)) return base + "+sign";
    if (std::holds_alternative<ClipToNorm>(post_)) return base + "+clip";
    if (std::holds_alternative<Mask>(post_)) return base + "+mask";
    return base;
}

}  // namespace genopt
