#pragma once

// Inner-product form of the pooled sample. Every direction in this library
// lies in the span of the centered observations, so it can be written as
// w = sum_i coef_i (z_i - z_bar) and fitted from the N x N Gram matrix alone.
// Relabeling then reduces to reindexing the Gram matrix.

#include "diproperm/data.hpp"
#include "diproperm/directions.hpp"

#include <cstddef>
#include <span>

namespace diproperm::gram {

struct PooledGram {
    Matrix k;          ///< K(i,j) = (z_i - z_bar) . (z_j - z_bar)
    Vector mean_dot;   ///< z_bar . (z_i - z_bar)
    double mean_sq = 0;  ///< ||z_bar||^2
    Index d = 0;
    Index split_m = 0;

    Index total() const noexcept { return k.rows(); }
};

PooledGram make(const PooledSample& pooled);

/// Row/column i of the result is row/column order[i] of the input.
PooledGram reorder(const PooledGram& g, std::span<const std::size_t> order);

/// Contrast vector c with c_i = 1/m on group X and -1/n on group Y, so that
/// X_bar - Y_bar = sum_i c_i (z_i - z_bar).
Vector contrast(Index total, Index split_m);

struct Fit {
    Vector coef;         ///< unit-norm, X-ward direction coefficients
    Vector centered;     ///< (z_i - z_bar) . w
    double offset = 0;   ///< z_bar . w; raw projection = centered + offset
};

/// Direction coefficients before normalization and orientation; for FLD
/// these give W^+ (X_bar - Y_bar) exactly. Throws DegenerateDirection.
Vector raw_coefficients(const PooledGram& g, DirectionMethod method, const SolverOptions& opts = {});

Fit fit(const PooledGram& g, DirectionMethod method, const SolverOptions& opts = {});

/// Between-class median-distance penalty computed from the Gram matrix.
double default_penalty(const PooledGram& g);

/// Per-coordinate variance estimates trace(S_X)/d and trace(S_Y)/d
/// (unbiased sample covariances of the raw observations in each group).
std::pair<double, double> per_coordinate_variances(const PooledGram& g);

}  // namespace diproperm::gram
