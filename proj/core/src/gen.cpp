#include "genopt/gen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace genopt {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double probe_at(const Objective& obj, const ParamVector& w, const ParamVector& direction, double eta,
                const BatchSelector& batch) {
    try {
        const double l = obj.loss(axpy(-eta, direction, w), batch);
        return std::isfinite(l) ? l : kNaN;
    } catch (const NonFiniteValue&) {
        return kNaN;
    }
}

void require_positive_eta(double eta_prev) {
    if (!(eta_prev > 0.0) || !std::isfinite(eta_prev)) {
        throw InvalidArgument("eta_prev must be finite and > 0");
    }
}

// Looks up the loss at exactly `eta` in a probe list.
std::optional<double> loss_at(std::span<const Probe> probes, double eta) {
    for (const auto& p : probes) {
        if (p.eta == eta) return p.loss;
    }
    return std::nullopt;
}

struct Curvature {
    double slope;      // Gᵀd
    double curvature;  // dᵀHd
};

Curvature directional_terms(const Objective& obj, const ParamVector& w, const ParamVector& raw_grad,
                            const ParamVector& direction, const BatchSelector& batch, HvpSource source) {
    if (direction.is_zero()) {
        throw InvalidArgument("exact_eta_hvp: direction must be non-zero");
    }
    const bool exact = source == HvpSource::automatic && (obj.has_hvp() || obj.has_exact_hessian());
    const ParamVector hd = exact ? obj.hvp(w, direction, batch) : hvp_finite_difference(obj, w, direction, batch);
    return {dot(raw_grad, direction), dot(direction, hd)};
}

}  // namespace

std::vector<Probe> probe_losses(const Objective& obj, const ParamVector& w, const ParamVector& direction,
                                double eta_prev, const BatchSelector& batch, int points, double l_zero) {
    require_positive_eta(eta_prev);
    require_same_dim(w, direction);
    obj.require_dim(w);
    std::vector<double> multiples;
    if (points == 3) {
        multiples = {-1.0, 0.0, 1.0};
    } else if (points == 5) {
        multiples = {-2.0, -1.0, 0.0, 1.0, 2.0};
    } else {
        throw InvalidArgument("probe_losses: points must be 3 or 5, got " + std::to_string(points));
    }
    std::vector<Probe> out;
    out.reserve(multiples.size());
    for (double k : multiples) {
        const double eta = k * eta_prev;
        out.push_back({eta, k == 0.0 ? l_zero : probe_at(obj, w, direction, eta, batch)});
    }
    return out;
}

std::vector<Probe> probe_losses(const Objective& obj, const ParamVector& w, const ParamVector& direction,
                                double eta_prev, const BatchSelector& batch, int points) {
    return probe_losses(obj, w, direction, eta_prev, batch, points, obj.loss(w, batch));
}

std::optional<double> QuadraticFit::eta_candidate() const {
    if (!solvable || a_star == 0.0) return std::nullopt;
    const double eta = b_star / a_star;
    if (!std::isfinite(eta)) return std::nullopt;
    return eta;
}

bool QuadraticFit::acceptable(double r2_threshold) const {
    return solvable && a_star > 0.0 && b_star > 0.0 && r2 > r2_threshold && eta_candidate().has_value();
}

QuadraticFit fit_quadratic(std::span<const Probe> probes) {
    if (probes.size() < 3) {
        throw InvalidArgument("fit_quadratic: need at least 3 probes");
    }
    std::vector<double> etas;
    etas.reserve(probes.size());
    for (const auto& p : probes) {
        if (!std::isfinite(p.eta)) throw InvalidArgument("fit_quadratic: non-finite probe eta");
        etas.push_back(p.eta);
    }
    std::sort(etas.begin(), etas.end());
    if (std::adjacent_find(etas.begin(), etas.end()) != etas.end()) {
        throw InvalidArgument("fit_quadratic: probe etas must be distinct");
    }
    const auto l0 = loss_at(probes, 0.0);
    if (!l0) {
        throw InvalidArgument("fit_quadratic: probes must include eta = 0");
    }

    QuadraticFit fit;
    if (!std::isfinite(*l0)) return fit;
    for (const auto& p : probes) {
        if (!std::isfinite(p.loss)) return fit;
    }

    // Work in t = eta / h so that the normal equations are O(1).
    double h = 0.0;
    for (const auto& p : probes) h = std::max(h, std::abs(p.eta));

    double suu = 0.0, suv = 0.0, svv = 0.0, suy = 0.0, svy = 0.0;
    std::size_t nonzero = 0;
    for (const auto& p : probes) {
        if (p.eta == 0.0) continue;
        ++nonzero;
        const double t = p.eta / h;
        const double u = 0.5 * t * t;
        const double v = -t;
        const double y = p.loss - *l0;
        suu += u * u;
        suv += u * v;
        svv += v * v;
        suy += u * y;
        svy += v * y;
    }
    const double det = suu * svv - suv * suv;
    if (nonzero < 2 || !(det > 1e-14 * suu * svv)) return fit;

    const double a_t = (svv * suy - suv * svy) / det;
    const double b_t = (suu * svy - suv * suy) / det;
    fit.a_star = a_t / (h * h);
    fit.b_star = b_t / h;
    fit.solvable = std::isfinite(fit.a_star) && std::isfinite(fit.b_star);
    if (!fit.solvable) return fit;

    double mean = 0.0;
    for (const auto& p : probes) {
        if (p.eta != 0.0) mean += p.loss - *l0;
    }
    mean /= static_cast<double>(nonzero);
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& p : probes) {
        if (p.eta == 0.0) continue;
        const double t = p.eta / h;
        const double y = p.loss - *l0;
        const double r = y - (a_t * 0.5 * t * t - b_t * t);
        ss_res += r * r;
        ss_tot += (y - mean) * (y - mean);
    }
    if (ss_tot == 0.0) {
        fit.r2 = 0.0;
    } else if (nonzero == 2) {
        fit.r2 = 1.0;
    } else {
        fit.r2 = 1.0 - ss_res / ss_tot;
    }
    return fit;
}

std::optional<double> lqa3_eta(double l_minus, double l_zero, double l_plus, double eta_prev) {
    require_positive_eta(eta_prev);
    // Differences against l_zero first: exact when the probes sit close to it.
    const double up = l_plus - l_zero;
    const double down = l_minus - l_zero;
    const double curvature = up + down;
    if (curvature == 0.0) return std::nullopt;
    return eta_prev / 2.0 * (up - down) / curvature;
}

std::optional<double> fd5_eta(double l_m2, double l_m1, double l_0, double l_p1, double l_p2, double eta_prev) {
    require_positive_eta(eta_prev);
    const double m2 = l_m2 - l_0;
    const double m1 = l_m1 - l_0;
    const double p1 = l_p1 - l_0;
    const double p2 = l_p2 - l_0;
    const double num = -p2 / 12.0 + 2.0 / 3.0 * p1 - 2.0 / 3.0 * m1 + m2 / 12.0;
    const double den = -p2 / 12.0 + 4.0 / 3.0 * p1 + 4.0 / 3.0 * m1 - m2 / 12.0;
    if (den == 0.0) return std::nullopt;
    return eta_prev * num / den;
}

std::optional<double> lqa3_from_probes(std::span<const Probe> probes) {
    if (probes.size() != 3 || probes[1].eta != 0.0 || probes[0].eta != -probes[2].eta || !(probes[2].eta > 0.0)) {
        throw InvalidArgument("lqa3_from_probes: expected ascending symmetric 3-point probes");
    }
    return lqa3_eta(probes[2].loss, probes[1].loss, probes[0].loss, probes[2].eta);
}

std::optional<double> fd5_from_probes(std::span<const Probe> probes) {
    if (probes.size() != 5 || probes[2].eta != 0.0 || !(probes[3].eta > 0.0) ||
        probes[1].eta != -probes[3].eta || probes[0].eta != -probes[4].eta ||
        probes[4].eta != 2.0 * probes[3].eta) {
        throw InvalidArgument("fd5_from_probes: expected ascending symmetric 5-point probes");
    }
    // Descent-side probe at +k·eta is the ascent-side value at −k·eta.
    return fd5_eta(probes[4].loss, probes[3].loss, probes[2].loss, probes[1].loss, probes[0].loss, probes[3].eta);
}

double smooth(double eta_prev, double eta_candidate, double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        throw InvalidArgument("smooth: gamma must lie in [0, 1)");
    }
    return gamma * eta_prev + (1.0 - gamma) * eta_candidate;
}

ParamVector hvp_finite_difference(const Objective& obj, const ParamVector& w, const ParamVector& v,
                                  const BatchSelector& batch) {
    require_same_dim(w, v);
    const double vn = v.norm();
    if (vn == 0.0) {
        return ParamVector::zeros(v.size());
    }
    const double eps = 1e-5 * (1.0 + w.norm()) / vn;
    const ParamVector gp = obj.grad(axpy(eps, v, w), batch);
    const ParamVector gm = obj.grad(axpy(-eps, v, w), batch);
    return scaled(1.0 / (2.0 * eps), gp - gm);
}

std::optional<double> exact_eta_hvp(const Objective& obj, const ParamVector& w, const ParamVector& raw_grad,
                                    const ParamVector& direction, const BatchSelector& batch, HvpSource source) {
    const auto terms = directional_terms(obj, w, raw_grad, direction, batch, source);
    if (!(terms.curvature > 0.0)) return std::nullopt;
    return terms.slope / terms.curvature;
}

double auto_search_eta0(const Objective& obj, const ParamVector& w, const ParamVector& direction,
                        const BatchSelector& batch) {
    if (direction.is_zero()) {
        throw InvalidArgument("auto_search_eta0: direction must be non-zero");
    }
    std::optional<double> best_eta;
    double best_loss = 0.0;
    for (int k = -6; k <= 2; ++k) {
        const double eta = std::pow(10.0, k);
        const double l = probe_at(obj, w, direction, eta, batch);
        if (!std::isfinite(l)) continue;
        if (!best_eta || l < best_loss) {
            best_eta = eta;
            best_loss = l;
        }
    }
    if (!best_eta) {
        throw Error("auto_search_eta0: every grid probe was non-finite");
    }
    return *best_eta;
}

void GenSettings::validate() const {
    if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw InvalidArgument("gen: eta0 must be finite and > 0");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("gen: gamma must lie in [0, 1)");
    if (phi < 1) throw InvalidArgument("gen: phi must be >= 1");
    if (!std::isfinite(r2_threshold) || r2_threshold > 1.0) {
        throw InvalidArgument("gen: r2_threshold must be finite and <= 1");
    }
    if (probe_points != 3 && probe_points != 5) throw InvalidArgument("gen: probe_points must be 3 or 5");
    if (decay_enabled && (!horizon || *horizon < 1)) {
        throw InvalidArgument("gen: decay requires a horizon >= 1");
    }
    if (!(clamp_ratio == 0.0 || (clamp_ratio >= 1.0 && std::isfinite(clamp_ratio)))) {
        throw InvalidArgument("gen: clamp_ratio must be 0 (off) or >= 1");
    }
}

GenController::GenController(GenSettings settings) : settings_(std::move(settings)), eta_(settings_.eta0) {
    settings_.validate();
}

void GenController::reset_eta(double eta) {
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw InvalidArgument("gen: eta must be finite and > 0");
    }
    eta_ = eta;
}

std::optional<double> GenController::finalize_candidate(double candidate) const {
    const double t = static_cast<double>(step_ + 1);
    if (settings_.decay_enabled) {
        candidate *= 1.0 - t / static_cast<double>(*settings_.horizon);
    }
    if (settings_.clamp_ratio > 0.0) {
        candidate = std::clamp(candidate, eta_ / settings_.clamp_ratio, eta_ * settings_.clamp_ratio);
    }
    const double next = smooth(eta_, candidate, settings_.gamma);
    if (!(next > 0.0) || !std::isfinite(next)) return std::nullopt;
    return next;
}

GenOutcome GenController::update(const Objective& obj, const ParamVector& w, const ParamVector& direction,
                                 const BatchSelector& batch, double l_zero, const ParamVector* raw_grad) {
    GenOutcome out;
    if (!due()) {
        ++step_;
        out.eta = eta_;
        return out;
    }
    ++attempts_;
    out.attempted = true;

    std::optional<double> candidate;
    bool guards_pass = false;
    if (settings_.estimator == Estimator::curve_fit) {
        const auto probes = probe_losses(obj, w, direction, eta_, batch, settings_.probe_points, l_zero);
        probe_evals_ += probes.size() - 1;
        const QuadraticFit fit = fit_quadratic(probes);
        if (fit.solvable) out.r2 = fit.r2;
        candidate = fit.eta_candidate();
        guards_pass = fit.acceptable(settings_.r2_threshold);
    } else if (!direction.is_zero()) {
        const ParamVector g = raw_grad ? *raw_grad : obj.grad(w, batch);
        const auto terms = directional_terms(obj, w, g, direction, batch, HvpSource::automatic);
        if (terms.curvature != 0.0 && std::isfinite(terms.slope / terms.curvature)) {
            candidate = terms.slope / terms.curvature;
        }
        guards_pass = candidate && terms.curvature > 0.0 && terms.slope > 0.0;
    }
    out.eta_candidate = candidate;

    if (guards_pass) {
        if (const auto next = finalize_candidate(*candidate)) {
            eta_ = *next;
            out.accepted = true;
            ++accepts_;
        }
    }
    ++step_;
    out.eta = eta_;
    return out;
}

GenUpdateResult gen_update(GenController& ctrl, const Objective& obj, const ParamVector& w,
                           const ParamVector& direction, const BatchSelector& batch, double l_zero,
                           const ParamVector* raw_grad) {
    const GenOutcome o = ctrl.update(obj, w, direction, batch, l_zero, raw_grad);
    GenUpdateResult r;
    r.new_eta = o.eta;
    r.record.step = ctrl.step();
    r.record.loss = l_zero;
    r.record.eta = o.eta;
    r.record.eta_candidate = o.eta_candidate;
    r.record.fit_accepted = o.accepted;
    r.record.fit_r2 = o.r2;
    return r;
}

}  // namespace genopt
