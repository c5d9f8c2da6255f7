#pragma once

#include "diproperm/data.hpp"
#include "diproperm/rng.hpp"

#include <Eigen/QR>

#include <random>

namespace diproperm::fixtures {

inline Matrix gaussian_matrix(Index rows, Index cols, Engine& engine, double sd = 1.0, double shift = 0.0) {
    std::normal_distribution<double> normal(shift, sd);
    Matrix out(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) out(i, j) = normal(engine);
    return out;
}

inline SamplePair gaussian_pair(Index m, Index n, Index d, std::uint64_t seed, double shift = 0.0) {
    Engine e(seed);
    Matrix x = gaussian_matrix(m, d, e, 1.0, shift);
    Matrix y = gaussian_matrix(n, d, e);
    return SamplePair(std::move(x), std::move(y));
}

inline Matrix random_orthogonal(Index d, Engine& engine) {
    Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(d, d, engine));
    return qr.householderQ();
}

}  // namespace diproperm::fixtures
