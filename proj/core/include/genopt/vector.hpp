#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "genopt/errors.hpp"

namespace genopt {

/// Dense parameter / gradient vector.
///
/// Immutable through its public interface apart from assignment. Every
/// constructor and every arithmetic helper below rejects NaN and infinite
/// entries, so a ParamVector in hand is always finite.
class ParamVector {
public:
    ParamVector() = default;
    ParamVector(std::initializer_list<double> values);
    explicit ParamVector(std::vector<double> values);
    explicit ParamVector(Eigen::VectorXd values);

    static ParamVector zeros(std::size_t dim);

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(data_.size()); }
    [[nodiscard]] double operator[](std::size_t i) const { return data_[static_cast<Eigen::Index>(i)]; }
    [[nodiscard]] std::span<const double> values() const noexcept {
        return {data_.data(), static_cast<std::size_t>(data_.size())};
    }
    [[nodiscard]] const Eigen::VectorXd& eigen() const noexcept { return data_; }
    [[nodiscard]] std::vector<double> to_std() const { return {data_.begin(), data_.end()}; }

    [[nodiscard]] double norm() const { return data_.norm(); }
    [[nodiscard]] bool is_zero() const { return data_.isZero(0.0); }

    friend bool operator==(const ParamVector& a, const ParamVector& b) {
        return a.data_.size() == b.data_.size() && a.data_ == b.data_;
    }

private:
    Eigen::VectorXd data_;
};

/// Throws DimensionMismatch unless both vectors have the same length.
void require_same_dim(const ParamVector& x, const ParamVector& y);

/// y + alpha * x.
[[nodiscard]] ParamVector axpy(double alpha, const ParamVector& x, const ParamVector& y);
[[nodiscard]] double dot(const ParamVector& x, const ParamVector& y);
[[nodiscard]] ParamVector scaled(double alpha, const ParamVector& x);
[[nodiscard]] ParamVector operator+(const ParamVector& x, const ParamVector& y);
[[nodiscard]] ParamVector operator-(const ParamVector& x, const ParamVector& y);
[[nodiscard]] double distance(const ParamVector& x, const ParamVector& y);

}  // namespace genopt
