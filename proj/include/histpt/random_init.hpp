#pragma once

#include "histpt/matrix.hpp"
#include "histpt/rng.hpp"

namespace histpt {

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0);
Vec gaussian_vec(std::size_t n, Rng& rng, double scale = 1.0);

/// Random matrix with orthonormal rows (Gram-Schmidt over seeded Gaussian
/// draws). Requires rows <= cols.
Matrix orthonormal_rows(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace histpt
