#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "genopt/objective.hpp"

namespace genopt {

/// Loss, gradient and Hessian at a single point.
struct Evaluation {
    double loss = 0.0;
    ParamVector grad;
    Eigen::MatrixXd hessian;
};

/// f(x1, x2) = 100 (x2 - x1^2)^2 + (1 - x1)^2, minimum 0 at (1, 1).
[[nodiscard]] Evaluation rosenbrock_eval(const ParamVector& w);

/// f(x1, x2) = (1.5 - x1 + x1 x2)^2 + (2.25 - x1 + x1 x2^2)^2 + (2.625 - x1 + x1 x2^3)^2,
/// minimum 0 at (3, 0.5).
[[nodiscard]] Evaluation beale_eval(const ParamVector& w);

class RosenbrockProblem final : public Objective {
public:
    [[nodiscard]] std::string name() const override { return "rosenbrock"; }
    [[nodiscard]] std::size_t dimension() const override { return 2; }
    [[nodiscard]] double loss(const ParamVector& w, const BatchSelector& batch) const override;
    [[nodiscard]] ParamVector grad(const ParamVector& w, const BatchSelector& batch) const override;
    [[nodiscard]] bool has_exact_hessian() const override { return true; }
    [[nodiscard]] Eigen::MatrixXd hessian(const ParamVector& w, const BatchSelector& batch) const override;
    [[nodiscard]] std::optional<ParamVector> optimum() const override { return ParamVector{1.0, 1.0}; }
};

class BealeProblem final : public Objective {
public:
    [[nodiscard]] std::string name() const override { return "beale"; }
    [[nodiscard]] std::size_t dimension() const override { return 2; }
    [[nodiscard]] double loss(const ParamVector& w, const BatchSelector& batch) const override;
    [[nodiscard]] ParamVector grad(const ParamVector& w, const BatchSelector& batch) const override;
    [[nodiscard]] bool has_exact_hessian() const override { return true; }
    [[nodiscard]] Eigen::MatrixXd hessian(const ParamVector& w, const BatchSelector& batch) const override;
    [[nodiscard]] std::optional<ParamVector> optimum() const override { return ParamVector{3.0, 0.5}; }
};

/// L(w) = 1/2 (w - offset)^T A (w - offset) with A symmetric positive definite.
/// The second-order Taylor model is exact on this family.
class QuadraticProblem final : public Objective {
public:
    /// Throws InvalidArgument unless `matrix_a` is square, symmetric, positive
    /// definite (Cholesky succeeds) and matches `offset` in dimension.
    QuadraticProblem(Eigen::MatrixXd matrix_a, ParamVector offset);

    [[nodiscard]] std::string name() const override { return "quadratic"; }
    [[nodiscard]] std::size_t dimension() const override { return offset_.size(); }
    [[nodiscard]] double loss(const ParamVector& w, const BatchSelector& batch) const override;
    [[nodiscard]] ParamVector grad(const ParamVector& w, const BatchSelector& batch) const override;
    [[nodiscard]] bool has_exact_hessian() const override { return true; }
    [[nodiscard]] Eigen::MatrixXd hessian(const ParamVector& w, const BatchSelector& batch) const override;
    [[nodiscard]] std::optional<ParamVector> optimum() const override { return offset_; }

    [[nodiscard]] const Eigen::MatrixXd& matrix_a() const noexcept { return a_; }
    [[nodiscard]] const ParamVector& offset() const noexcept { return offset_; }

    /// A^{-1} v, via the cached Cholesky factor.
    [[nodiscard]] ParamVector solve(const ParamVector& v) const;

    /// Random SPD instance: A = Q diag(lambda) Q^T with eigenvalues in
    /// [min_eig, max_eig], offset ~ N(0, 1).
    static QuadraticProblem random(std::size_t dim, std::uint64_t seed, double min_eig = 0.1, double max_eig = 10.0);

private:
    Eigen::MatrixXd a_;
    Eigen::MatrixXd chol_l_;
    ParamVector offset_;
};

[[nodiscard]] Evaluation quadratic_eval(const QuadraticProblem& p, const ParamVector& w);

/// Separable cubic L(w) = sum_i a_i w_i + b_i w_i^2 / 2 + c_i w_i^3 / 6.
/// Unbounded below, used only to study stencil truncation error.
class CubicProblem final : public Objective {
public:
    CubicProblem(std::vector<double> linear, std::vector<double> quadratic, std::vector<double> cubic);

    [[nodiscard]] std::string name() const override { return "cubic"; }
    [[nodiscard]] std::size_t dimension() const override { return a_.size(); }
    [[nodiscard]] double loss(const ParamVector& w, const BatchSelector& batch) const override;
    [[nodiscard]] ParamVector grad(const ParamVector& w, const BatchSelector& batch) const override;
    [[nodiscard]] bool has_exact_hessian() const override { return true; }
    [[nodiscard]] Eigen::MatrixXd hessian(const ParamVector& w, const BatchSelector& batch) const override;

private:
    std::vector<double> a_, b_, c_;
};

/// Binary logistic regression with mean cross-entropy plus l2_penalty·‖w‖²/2.
class LogisticRegressionProblem final : public Objective {
public:
    /// labels must be 0 or 1; features is n×d.
    LogisticRegressionProblem(Eigen::MatrixXd features, std::vector<int> labels, double l2_penalty,
                              std::uint64_t generator_seed = 0);

    [[nodiscard]] std::string name() const override { return "logistic"; }
    [[nodiscard]] std::size_t dimension() const override { return static_cast<std::size_t>(x_.cols()); }
    [[nodiscard]] std::size_t dataset_size() const override { return static_cast<std::size_t>(x_.rows()); }

    [[nodiscard]] double loss(const ParamVector& w, const BatchSelector& batch) const override;
    [[nodiscard]] ParamVector grad(const ParamVector& w, const BatchSelector& batch) const override;
    [[nodiscard]] bool has_exact_hessian() const override { return true; }
    [[nodiscard]] Eigen::MatrixXd hessian(const ParamVector& w, const BatchSelector& batch) const override;

    struct LossAndGrad {
        double loss;
        ParamVector grad;
    };
    [[nodiscard]] LossAndGrad minibatch(const ParamVector& w, const BatchSelector& batch) const;

    [[nodiscard]] const Eigen::MatrixXd& features() const noexcept { return x_; }
    [[nodiscard]] const std::vector<int>& labels() const noexcept { return y_; }
    [[nodiscard]] double l2_penalty() const noexcept { return l2_; }
    [[nodiscard]] std::uint64_t generator_seed() const noexcept { return seed_; }

private:
    Eigen::MatrixXd x_;
    std::vector<int> y_;
    double l2_;
    std::uint64_t seed_;
};

/// Same as LogisticRegressionProblem::minibatch. Throws InvalidArgument on an
/// empty or out-of-range batch.
[[nodiscard]] LogisticRegressionProblem::LossAndGrad logreg_minibatch(const LogisticRegressionProblem& p,
                                                                      const ParamVector& w,
                                                                      const BatchSelector& batch);

/// Synthetic planted-separator dataset: standard normal features, a true
/// weight vector drawn from the same seed, labels from sign(x^T w_true) with
/// each label flipped with probability `label_noise`.
[[nodiscard]] LogisticRegressionProblem generate_dataset(std::uint64_t seed, std::size_t n, std::size_t d,
                                                         double l2_penalty = 0.0, double label_noise = 0.05);

}  // namespace genopt
