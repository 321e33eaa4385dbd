#include "genopt/vector.hpp"

#include <cmath>
#include <string>

namespace genopt {
namespace {

Eigen::VectorXd checked(Eigen::VectorXd v, const char* what) {
    if (!v.allFinite()) {
        throw NonFiniteValue(std::string(what) + ": non-finite entry");
    }
    return v;
}

}  // namespace

ParamVector::ParamVector(std::initializer_list<double> values)
    : ParamVector(std::vector<double>(values)) {}

ParamVector::ParamVector(std::vector<double> values)
    : data_(checked(Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())),
                    "ParamVector")) {}

ParamVector::ParamVector(Eigen::VectorXd values) : data_(checked(std::move(values), "ParamVector")) {}

ParamVector ParamVector::zeros(std::size_t dim) {
    return ParamVector(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)));
}

void require_same_dim(const ParamVector& x, const ParamVector& y) {
    if (x.size() != y.size()) {
        throw DimensionMismatch(x.size(), y.size());
    }
}

ParamVector axpy(double alpha, const ParamVector& x, const ParamVector& y) {
    require_same_dim(x, y);
    if (!std::isfinite(alpha)) {
        throw NonFiniteValue("axpy: non-finite alpha");
    }
    return ParamVector(Eigen::VectorXd(y.eigen() + alpha * x.eigen()));
}

double dot(const ParamVector& x, const ParamVector& y) {
    require_same_dim(x, y);
    return x.eigen().dot(y.eigen());
}

ParamVector scaled(double alpha, const ParamVector& x) {
    if (!std::isfinite(alpha)) {
        throw NonFiniteValue("scaled: non-finite factor");
    }
    return ParamVector(Eigen::VectorXd(alpha * x.eigen()));
}

ParamVector operator+(const ParamVector& x, const ParamVector& y) {
    require_same_dim(x, y);
    return ParamVector(Eigen::VectorXd(x.eigen() + y.eigen()));
}

ParamVector operator-(const ParamVector& x, const ParamVector& y) {
    require_same_dim(x, y);
    return ParamVector(Eigen::VectorXd(x.eigen() - y.eigen()));
}

double distance(const ParamVector& x, const ParamVector& y) {
    require_same_dim(x, y);
    return (x.eigen() - y.eigen()).norm();
}

}  // namespace genopt
