#include "histpt/random_init.hpp"

#include <cmath>

#include "histpt/errors.hpp"

namespace histpt {

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale) {
  Matrix m(rows, cols);
  for (double& x : m.data()) x = scale * rng.next_gaussian();
  return m;
}

Vec gaussian_vec(std::size_t n, Rng& rng, double scale) {
  Vec v(n);
  for (double& x : v) x = scale * rng.next_gaussian();
  return v;
}

Matrix orthonormal_rows(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows > cols) {
    throw ConfigError("orthonormal_rows: cannot fit " + std::to_string(rows) +
                      " orthonormal rows in dimension " + std::to_string(cols));
  }
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    // Redraw on (vanishingly unlikely) near-dependence instead of dividing by
    // a tiny residual norm.
    for (;;) {
      Vec cand = gaussian_vec(cols, rng);
      for (std::size_t prev = 0; prev < r; ++prev) {
        const double proj = dot(m.row(prev), cand);
        for (std::size_t c = 0; c < cols; ++c) cand[c] -= proj * m(prev, c);
      }
      const double n = norm(cand);
      if (n > 1e-8) {
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = cand[c] / n;
        break;
      }
    }
  }
  return m;
}

}  // namespace histpt
