#pragma once

#include <initializer_list>
#include <random>
#include <vector>

#include "tlnp/dataset.hpp"
#include "tlnp/models.hpp"

namespace tlnp::testing {

// 1-d dataset whose rows are the given values.
inline Dataset column(std::initializer_list<double> values, Role role) {
    Dataset d{Matrix(static_cast<Eigen::Index>(values.size()), 1), role, SplitKind::train};
    Eigen::Index i = 0;
    for (double v : values) d.X(i++, 0) = v;
    return d;
}

inline Dataset column(const std::vector<double>& values, Role role) {
    Dataset d{Matrix(static_cast<Eigen::Index>(values.size()), 1), role, SplitKind::train};
    for (std::size_t i = 0; i < values.size(); ++i) d.X(static_cast<Eigen::Index>(i), 0) = values[i];
    return d;
}

// h(x) = slope * x + offset on 1-d inputs.
inline Model line(double slope, double offset) {
    Vector p(2);
    p << slope, offset;
    return make_model(ModelKind::linear, Architecture{1, 0}, p);
}

// h(x) = x, so scores equal the 1-d data values.
inline Model identity() { return line(1.0, 0.0); }

// Constant score h(x) = value for d-dimensional input.
inline Model constant(double value, std::size_t dim = 1) {
    Vector p = Vector::Zero(static_cast<Eigen::Index>(dim + 1));
    p[static_cast<Eigen::Index>(dim)] = value;
    return make_model(ModelKind::linear, Architecture{dim, 0}, p);
}

inline Dataset gaussian(std::size_t n, std::size_t d, double mean, Role role, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(mean, 1.0);
    Dataset out{Matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d)), role,
                SplitKind::train};
    for (Eigen::Index r = 0; r < out.X.rows(); ++r)
        for (Eigen::Index c = 0; c < out.X.cols(); ++c) out.X(r, c) = z(rng);
    return out;
}

inline Vector random_vector(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

inline double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)});
}

}  // namespace tlnp::testing
