#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "genopt/objective.hpp"

namespace genopt {

// Sign convention used throughout this header:
//
//  * A Probe with learning rate `eta` holds L(w − eta·d), the descent
//    parametrization. Probe sets are symmetric around eta = 0.
//  * The closed forms lqa3_eta / fd5_eta take ascent-side arguments:
//    l_plus = L(w + eta_prev·d), l_minus = L(w − eta_prev·d).
//
// So the probe at eta = −eta_prev is `l_plus` and the probe at +eta_prev is
// `l_minus`. lqa3_from_probes / fd5_from_probes do that mapping.

struct Probe {
    double eta = 0.0;
    double loss = 0.0;
};

/// Loss at w − eta·direction for eta ∈ {−eta_prev, 0, eta_prev} (points = 3) or
/// {−2, −1, 0, 1, 2}·eta_prev (points = 5), ascending in eta. The eta = 0 entry
/// is `l_zero` verbatim. Every evaluation uses `batch`. A probe whose point or
/// loss is non-finite is reported with a NaN loss.
[[nodiscard]] std::vector<Probe> probe_losses(const Objective& obj, const ParamVector& w,
                                              const ParamVector& direction, double eta_prev,
                                              const BatchSelector& batch, int points, double l_zero);

/// Same, evaluating L(w) itself.
[[nodiscard]] std::vector<Probe> probe_losses(const Objective& obj, const ParamVector& w,
                                              const ParamVector& direction, double eta_prev,
                                              const BatchSelector& batch, int points);

/// Least-squares fit of L(w − eta·d) − L(w) ≈ A·eta²/2 − b·eta.
struct QuadraticFit {
    double a_star = 0.0;  ///< estimate of dᵀHd
    double b_star = 0.0;  ///< estimate of Gᵀd
    double r2 = 0.0;
    bool solvable = false;  ///< normal equations were non-singular and data finite

    /// b*/A*, when the fit is solvable and A* ≠ 0.
    [[nodiscard]] std::optional<double> eta_candidate() const;

    /// A* > 0, b* > 0 and r2 > r2_threshold.
    [[nodiscard]] bool acceptable(double r2_threshold) const;
};

/// Requires at least three probes with distinct eta values, one of them
/// exactly 0 (InvalidArgument otherwise). Fewer than two distinct non-zero
/// etas, or any non-finite loss, gives an unsolvable (rejected) fit.
///
/// r2 is 1 − SS_res/SS_tot over the non-zero-eta points, 0 when SS_tot = 0.
/// With exactly two non-zero points the model interpolates and r2 = 1.
[[nodiscard]] QuadraticFit fit_quadratic(std::span<const Probe> probes);

/// (eta_prev/2)·(l_plus − l_minus)/(l_plus − 2·l_zero + l_minus).
/// nullopt when the curvature term is exactly zero.
[[nodiscard]] std::optional<double> lqa3_eta(double l_minus, double l_zero, double l_plus, double eta_prev);

/// Five-point central-difference ratio, ascent-side arguments
/// l_m2 = L(w − 2η d) … l_p2 = L(w + 2η d).
[[nodiscard]] std::optional<double> fd5_eta(double l_m2, double l_m1, double l_0, double l_p1, double l_p2,
                                            double eta_prev);

[[nodiscard]] std::optional<double> lqa3_from_probes(std::span<const Probe> probes);
[[nodiscard]] std::optional<double> fd5_from_probes(std::span<const Probe> probes);

/// gamma·eta_prev + (1 − gamma)·eta_candidate, gamma ∈ [0, 1).
[[nodiscard]] double smooth(double eta_prev, double eta_candidate, double gamma);

/// H(w)·v by central differences of the gradient with step
/// eps0/‖v‖, eps0 = 1e-5·(1 + ‖w‖).
[[nodiscard]] ParamVector hvp_finite_difference(const Objective& obj, const ParamVector& w, const ParamVector& v,
                                                const BatchSelector& batch);

enum class HvpSource { automatic, finite_difference };

/// (Gᵀd)/(dᵀHd). H·d is exact when the objective offers it, otherwise (or when
/// `source` forces it) a finite difference of gradients. nullopt when dᵀHd ≤ 0.
[[nodiscard]] std::optional<double> exact_eta_hvp(const Objective& obj, const ParamVector& w,
                                                  const ParamVector& raw_grad, const ParamVector& direction,
                                                  const BatchSelector& batch = FullData{},
                                                  HvpSource source = HvpSource::automatic);

/// Grid 10^-6 … 10^2 (one point per decade); returns the eta minimizing
/// L(w − eta·d), ties to the smaller eta. Throws Error if every probe is
/// non-finite, InvalidArgument for a zero direction.
[[nodiscard]] double auto_search_eta0(const Objective& obj, const ParamVector& w, const ParamVector& direction,
                                      const BatchSelector& batch);

enum class Estimator { curve_fit, exact_hvp };

struct GenSettings {
    double eta0 = 1e-3;
    double gamma = 0.9;
    std::size_t phi = 8;
    double r2_threshold = 0.99;
    int probe_points = 3;
    bool decay_enabled = false;
    std::optional<std::size_t> horizon;
    /// Accepted candidates are clamped to [eta/clamp_ratio, eta·clamp_ratio]
    /// before smoothing; 0 disables the clamp.
    double clamp_ratio = 10.0;
    Estimator estimator = Estimator::curve_fit;
    /// Replace eta0 by auto_search_eta0 on the first iteration.
    bool auto_eta0 = false;

    /// Throws InvalidArgument on out-of-range values.
    void validate() const;
};

/// What one gen_update call did.
struct GenOutcome {
    double eta = 0.0;
    bool attempted = false;
    bool accepted = false;
    std::optional<double> eta_candidate;
    std::optional<double> r2;
};

/// Learning-rate state for one run.
///
/// Iterations are numbered from 1; an estimate is attempted on iteration t
/// only when t mod phi == 0. Rejected estimates leave eta untouched.
class GenController {
public:
    explicit GenController(GenSettings settings);

    [[nodiscard]] double eta() const noexcept { return eta_; }
    [[nodiscard]] const GenSettings& settings() const noexcept { return settings_; }
    /// Number of completed iterations.
    [[nodiscard]] std::size_t step() const noexcept { return step_; }
    [[nodiscard]] std::size_t fit_attempts() const noexcept { return attempts_; }
    [[nodiscard]] std::size_t fit_accepts() const noexcept { return accepts_; }
    [[nodiscard]] std::size_t probe_evaluations() const noexcept { return probe_evals_; }

    /// True when the next iteration will attempt an estimate.
    [[nodiscard]] bool due() const noexcept { return (step_ + 1) % settings_.phi == 0; }

    /// Overrides the current eta (auto search). Must be > 0 and finite.
    void reset_eta(double eta);

    /// Advances one iteration. `raw_grad` is required for the exact-HVP
    /// estimator and ignored by the curve fit.
    GenOutcome update(const Objective& obj, const ParamVector& w, const ParamVector& direction,
                      const BatchSelector& batch, double l_zero, const ParamVector* raw_grad = nullptr);

private:
    std::optional<double> finalize_candidate(double candidate) const;

    GenSettings settings_;
    double eta_;
    std::size_t step_ = 0;
    std::size_t attempts_ = 0;
    std::size_t accepts_ = 0;
    std::size_t probe_evals_ = 0;
};

/// Free-function form of GenController::update, returning the new eta and
/// a StepRecord carrying eta / candidate / acceptance / r2.
struct GenUpdateResult {
    double new_eta = 0.0;
    StepRecord record;
};

GenUpdateResult gen_update(GenController& ctrl, const Objective& obj, const ParamVector& w,
                           const ParamVector& direction, const BatchSelector& batch, double l_zero,
                           const ParamVector* raw_grad = nullptr);

}  // namespace genopt
