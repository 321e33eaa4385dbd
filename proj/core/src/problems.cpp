#include "genopt/problems.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace genopt {

// ---------------------------------------------------------------------------
// Objective defaults and batch resolution.

Eigen::MatrixXd Objective::hessian(const ParamVector&, const BatchSelector&) const {
    throw Error(name() + ": no exact Hessian available");
}

ParamVector Objective::hvp(const ParamVector& w, const ParamVector& v, const BatchSelector& batch) const {
    require_dim(v);
    return ParamVector(Eigen::VectorXd(hessian(w, batch) * v.eigen()));
}

void Objective::require_dim(const ParamVector& w) const {
    if (w.size() != dimension()) {
        throw DimensionMismatch(dimension(), w.size());
    }
}

const char* to_string(StepStatus s) {
    switch (s) {
        case StepStatus::ok: return "ok";
        case StepStatus::diverged: return "diverged";
    }
    return "unknown";
}

std::vector<std::size_t> resolve_batch(const BatchSelector& batch, std::size_t dataset_size) {
    std::vector<std::size_t> out;
    if (std::holds_alternative<FullData>(batch)) {
        out.resize(dataset_size);
        for (std::size_t i = 0; i < dataset_size; ++i) out[i] = i;
    } else if (const auto* set = std::get_if<IndexSet>(&batch)) {
        out = set->indices;
        std::vector<std::size_t> sorted = out;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw InvalidArgument("batch: duplicate sample index");
        }
        if (!sorted.empty() && sorted.back() >= dataset_size) {
            throw InvalidArgument("batch: index " + std::to_string(sorted.back()) + " out of range for " +
                                  std::to_string(dataset_size) + " samples");
        }
    } else {
        const auto& noise = std::get<SyntheticNoise>(batch);
        if (noise.batch_size == 0) {
            throw InvalidArgument("batch: batch_size must be >= 1");
        }
        if (dataset_size == 0) {
            throw InvalidArgument("batch: empty dataset");
        }
        std::mt19937_64 rng(noise.seed);
        std::uniform_int_distribution<std::size_t> pick(0, dataset_size - 1);
        out.resize(noise.batch_size);
        for (auto& idx : out) idx = pick(rng);
    }
    if (out.empty()) {
        throw InvalidArgument("batch: empty batch");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rosenbrock and Beale.

namespace {

void require_2d(const ParamVector& w) {
    if (w.size() != 2) throw DimensionMismatch(2, w.size());
}

}  // namespace

Evaluation rosenbrock_eval(const ParamVector& w) {
    require_2d(w);
    const double x = w[0];
    const double y = w[1];
    const double r = y - x * x;
    Evaluation e;
    e.loss = 100.0 * r * r + (1.0 - x) * (1.0 - x);
    e.grad = ParamVector{-400.0 * x * r - 2.0 * (1.0 - x), 200.0 * r};
    e.hessian.resize(2, 2);
    e.hessian << 1200.0 * x * x - 400.0 * y + 2.0, -400.0 * x,
                 -400.0 * x, 200.0;
    return e;
}

Evaluation beale_eval(const ParamVector& w) {
    require_2d(w);
    const double x = w[0];
    const double y = w[1];
    constexpr double c[3] = {1.5, 2.25, 2.625};

    Evaluation e;
    e.loss = 0.0;
    double gx = 0.0, gy = 0.0;
    double hxx = 0.0, hxy = 0.0, hyy = 0.0;
    double ypow = 1.0;  // y^(k-1)
    for (int k = 1; k <= 3; ++k) {
        const double yk = ypow * y;
        const double t = c[k - 1] - x + x * yk;
        const double tx = yk - 1.0;
        const double ty = k * x * ypow;
        const double txy = k * ypow;
        const double tyy = k >= 2 ? k * (k - 1) * x * (k == 2 ? 1.0 : y) : 0.0;
        e.loss += t * t;
        gx += 2.0 * t * tx;
        gy += 2.0 * t * ty;
        hxx += 2.0 * tx * tx;
        hxy += 2.0 * (tx * ty + t * txy);
        hyy += 2.0 * (ty * ty + t * tyy);
        ypow = yk;
    }
    e.grad = ParamVector{gx, gy};
    e.hessian.resize(2, 2);
    e.hessian << hxx, hxy, hxy, hyy;
    return e;
}

double RosenbrockProblem::loss(const ParamVector& w, const BatchSelector&) const {
    require_2d(w);
    const double r = w[1] - w[0] * w[0];
    return 100.0 * r * r + (1.0 - w[0]) * (1.0 - w[0]);
}

ParamVector RosenbrockProblem::grad(const ParamVector& w, const BatchSelector&) const {
    return rosenbrock_eval(w).grad;
}

Eigen::MatrixXd RosenbrockProblem::hessian(const ParamVector& w, const BatchSelector&) const {
    return rosenbrock_eval(w).hessian;
}

double BealeProblem::loss(const ParamVector& w, const BatchSelector&) const {
    require_2d(w);
    const double x = w[0];
    const double y = w[1];
    const double t1 = 1.5 - x + x * y;
    const double t2 = 2.25 - x + x * y * y;
    const double t3 = 2.625 - x + x * y * y * y;
    return t1 * t1 + t2 * t2 + t3 * t3;
}

ParamVector BealeProblem::grad(const ParamVector& w, const BatchSelector&) const {
    return beale_eval(w).grad;
}

Eigen::MatrixXd BealeProblem::hessian(const ParamVector& w, const BatchSelector&) const {
    return beale_eval(w).hessian;
}

// ---------------------------------------------------------------------------
// Quadratic.

QuadraticProblem::QuadraticProblem(Eigen::MatrixXd matrix_a, ParamVector offset)
    : a_(std::move(matrix_a)), offset_(std::move(offset)) {
    const auto d = static_cast<Eigen::Index>(offset_.size());
    if (d == 0 || a_.rows() != d || a_.cols() != d) {
        throw InvalidArgument("quadratic: matrix must be square and match the offset dimension");
    }
    if (!a_.allFinite()) {
        throw NonFiniteValue("quadratic: non-finite matrix entry");
    }
    const double scale = std::max(1.0, a_.cwiseAbs().maxCoeff());
    if ((a_ - a_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw InvalidArgument("quadratic: matrix is not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(a_);
    if (llt.info() != Eigen::Success) {
        throw InvalidArgument("quadratic: matrix is not positive definite");
    }
    chol_l_ = llt.matrixL();
}

Evaluation quadratic_eval(const QuadraticProblem& p, const ParamVector& w) {
    p.require_dim(w);
    const Eigen::VectorXd r = w.eigen() - p.offset().eigen();
    const Eigen::VectorXd ar = p.matrix_a() * r;
    return {0.5 * r.dot(ar), ParamVector(ar), p.matrix_a()};
}

double QuadraticProblem::loss(const ParamVector& w, const BatchSelector&) const {
    require_dim(w);
    const Eigen::VectorXd r = w.eigen() - offset_.eigen();
    return 0.5 * r.dot(a_ * r);
}

ParamVector QuadraticProblem::grad(const ParamVector& w, const BatchSelector&) const {
    require_dim(w);
    return ParamVector(Eigen::VectorXd(a_ * (w.eigen() - offset_.eigen())));
}

Eigen::MatrixXd QuadraticProblem::hessian(const ParamVector& w, const BatchSelector&) const {
    require_dim(w);
    return a_;
}

ParamVector QuadraticProblem::solve(const ParamVector& v) const {
    require_dim(v);
    const auto l = chol_l_.triangularView<Eigen::Lower>();
    Eigen::VectorXd z = l.solve(v.eigen());
    return ParamVector(Eigen::VectorXd(l.transpose().solve(z)));
}

QuadraticProblem QuadraticProblem::random(std::size_t dim, std::uint64_t seed, double min_eig, double max_eig) {
    if (dim == 0 || !(min_eig > 0.0) || max_eig < min_eig) {
        throw InvalidArgument("quadratic: invalid random instance parameters");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(std::log(min_eig), std::log(max_eig));
    const auto d = static_cast<Eigen::Index>(dim);

    Eigen::MatrixXd g(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) g(i, j) = normal(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    Eigen::VectorXd lambda(d);
    for (Eigen::Index i = 0; i < d; ++i) lambda[i] = std::exp(unif(rng));
    Eigen::MatrixXd a = q * lambda.asDiagonal() * q.transpose();
    a = 0.5 * (a + a.transpose()).eval();

    Eigen::VectorXd off(d);
    for (Eigen::Index i = 0; i < d; ++i) off[i] = normal(rng);
    return QuadraticProblem(std::move(a), ParamVector(std::move(off)));
}

// ---------------------------------------------------------------------------
// Cubic.

CubicProblem::CubicProblem(std::vector<double> linear, std::vector<double> quadratic, std::vector<double> cubic)
    : a_(std::move(linear)), b_(std::move(quadratic)), c_(std::move(cubic)) {
    if (a_.empty() || a_.size() != b_.size() || a_.size() != c_.size()) {
        throw InvalidArgument("cubic: coefficient vectors must be non-empty and of equal length");
    }
}

double CubicProblem::loss(const ParamVector& w, const BatchSelector&) const {
    require_dim(w);
    double s = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i) {
        const double x = w[i];
        s += x * (a_[i] + x * (b_[i] / 2.0 + x * c_[i] / 6.0));
    }
    return s;
}

ParamVector CubicProblem::grad(const ParamVector& w, const BatchSelector&) const {
    require_dim(w);
    std::vector<double> g(a_.size());
    for (std::size_t i = 0; i < a_.size(); ++i) {
        const double x = w[i];
        g[i] = a_[i] + x * (b_[i] + x * c_[i] / 2.0);
    }
    return ParamVector(std::move(g));
}

Eigen::MatrixXd CubicProblem::hessian(const ParamVector& w, const BatchSelector&) const {
    require_dim(w);
    const auto d = static_cast<Eigen::Index>(a_.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto k = static_cast<std::size_t>(i);
        h(i, i) = b_[k] + c_[k] * w[k];
    }
    return h;
}

// ---------------------------------------------------------------------------
// Logistic regression.

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

LogisticRegressionProblem::LogisticRegressionProblem(Eigen::MatrixXd features, std::vector<int> labels,
                                                     double l2_penalty, std::uint64_t generator_seed)
    : x_(std::move(features)), y_(std::move(labels)), l2_(l2_penalty), seed_(generator_seed) {
    if (x_.rows() < 1 || x_.cols() < 1) {
        throw InvalidArgument("logistic: empty feature matrix");
    }
    if (static_cast<std::size_t>(x_.rows()) != y_.size()) {
        throw InvalidArgument("logistic: feature rows and label count differ");
    }
    if (!(l2_ >= 0.0) || !std::isfinite(l2_)) {
        throw InvalidArgument("logistic: l2_penalty must be finite and >= 0");
    }
    if (!x_.allFinite()) {
        throw NonFiniteValue("logistic: non-finite feature");
    }
    for (int label : y_) {
        if (label != 0 && label != 1) throw InvalidArgument("logistic: labels must be 0 or 1");
    }
}

LogisticRegressionProblem::LossAndGrad LogisticRegressionProblem::minibatch(const ParamVector& w,
                                                                            const BatchSelector& batch) const {
    require_dim(w);
    const auto idx = resolve_batch(batch, dataset_size());
    const Eigen::VectorXd& wv = w.eigen();
    double total = 0.0;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(wv.size());
    for (std::size_t i : idx) {
        const auto row = x_.row(static_cast<Eigen::Index>(i));
        const double z = row.dot(wv);
        const double y = y_[i];
        total += softplus(z) - y * z;
        g.noalias() += (sigmoid(z) - y) * row.transpose();
    }
    const double inv_b = 1.0 / static_cast<double>(idx.size());
    g *= inv_b;
    g += l2_ * wv;
    return {total * inv_b + 0.5 * l2_ * wv.squaredNorm(), ParamVector(std::move(g))};
}

double LogisticRegressionProblem::loss(const ParamVector& w, const BatchSelector& batch) const {
    require_dim(w);
    const auto idx = resolve_batch(batch, dataset_size());
    const Eigen::VectorXd& wv = w.eigen();
    double total = 0.0;
    for (std::size_t i : idx) {
        const double z = x_.row(static_cast<Eigen::Index>(i)).dot(wv);
        total += softplus(z) - y_[i] * z;
    }
    return total / static_cast<double>(idx.size()) + 0.5 * l2_ * wv.squaredNorm();
}

ParamVector LogisticRegressionProblem::grad(const ParamVector& w, const BatchSelector& batch) const {
    return minibatch(w, batch).grad;
}

Eigen::MatrixXd LogisticRegressionProblem::hessian(const ParamVector& w, const BatchSelector& batch) const {
    require_dim(w);
    const auto idx = resolve_batch(batch, dataset_size());
    const auto d = x_.cols();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i : idx) {
        const auto row = x_.row(static_cast<Eigen::Index>(i));
        const double s = sigmoid(row.dot(w.eigen()));
        h.noalias() += s * (1.0 - s) * row.transpose() * row;
    }
    h /= static_cast<double>(idx.size());
    h.diagonal().array() += l2_;
    return h;
}

LogisticRegressionProblem::LossAndGrad logreg_minibatch(const LogisticRegressionProblem& p, const ParamVector& w,
                                                        const BatchSelector& batch) {
    return p.minibatch(w, batch);
}

LogisticRegressionProblem generate_dataset(std::uint64_t seed, std::size_t n, std::size_t d, double l2_penalty,
                                           double label_noise) {
    if (n < 2 || d < 1) {
        throw InvalidArgument("generate_dataset: need n >= 2 and d >= 1");
    }
    if (!(label_noise >= 0.0 && label_noise < 0.5)) {
        throw InvalidArgument("generate_dataset: label_noise must lie in [0, 0.5)");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution flip(label_noise);

    Eigen::VectorXd w_true(static_cast<Eigen::Index>(d));
    for (auto& v : w_true) v = normal(rng);

    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(r, j) = normal(rng);
        int label = x.row(r).dot(w_true) > 0.0 ? 1 : 0;
        if (flip(rng)) label = 1 - label;
        y[i] = label;
    }
    return LogisticRegressionProblem(std::move(x), std::move(y), l2_penalty, seed);
}

}  // namespace genopt
