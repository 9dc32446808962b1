// SPDX-License-Identifier: Apache-2.0
//
// milac-sim: analog matrix computing and beamforming simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <random>

#include "catch_amalgamated.hpp"
#include "milac/numerics.hpp"
#include "oracles.hpp"

using namespace milac;
using Catch::Matchers::WithinAbs;

namespace {

constexpr Complex j{0.0, 1.0};

/// Random matrix with condition number bounded by keeping it diagonally dominant.
ComplexMatrix well_conditioned(std::size_t n, std::mt19937_64& g) {
  ComplexMatrix a = oracle::random_matrix(n, n, g);
  for (std::size_t i = 0; i < n; ++i) a(i, i) += 2.0 * std::sqrt(static_cast<double>(n)) + 1.0;
  return a;
}

}  // namespace

TEST_CASE("mat_mul small cases", "[numerics]") {
  const ComplexMatrix a{{1.0, 2.0}, {3.0, 4.0}};
  CHECK(mat_mul(ComplexMatrix::identity(2), a) == a);

  const ComplexMatrix b{{1.0, j}, {0.0, 1.0}};
  const ComplexMatrix ones{{1.0}, {1.0}};
  const ComplexMatrix expected{{1.0 + j}, {1.0}};
  CHECK(mat_mul(b, ones) == expected);

  CHECK_THROWS_AS(mat_mul(a, ComplexMatrix(3, 1)), ShapeError);
}

TEST_CASE("mat_mul matches the triple-loop oracle", "[numerics]") {
  std::mt19937_64 g(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = oracle::random_matrix(8, 8, g);
    const auto b = oracle::random_matrix(8, 8, g);
    CHECK(relative_error(mat_mul(a, b), oracle::naive_product(a, b)) < 1e-12);
  }
}

TEST_CASE("mat_mul is associative", "[numerics]") {
  std::mt19937_64 g(12);
  for (int rep = 0; rep < 50; ++rep) {
    const auto a = oracle::random_matrix(5, 7, g);
    const auto b = oracle::random_matrix(7, 3, g);
    const auto c = oracle::random_matrix(3, 6, g);
    CHECK(relative_error((a * b) * c, a * (b * c)) < 1e-11);
  }
}

TEST_CASE("solve_linear small cases", "[numerics]") {
  const ComplexMatrix b{{1.0, 2.0}, {3.0, j}};
  CHECK(solve_linear(ComplexMatrix::identity(2), b) == b);

  const ComplexMatrix d{{2.0, 0.0}, {0.0, 4.0}};
  const ComplexMatrix rhs{{2.0}, {8.0}};
  const ComplexMatrix x = solve_linear(d, rhs);
  CHECK_THAT(std::abs(x(0, 0) - 1.0), WithinAbs(0.0, 1e-15));
  CHECK_THAT(std::abs(x(1, 0) - 2.0), WithinAbs(0.0, 1e-15));

  CHECK_THROWS_AS(solve_linear(ComplexMatrix(2, 3), ComplexMatrix(2, 1)), ShapeError);
  CHECK_THROWS_AS(solve_linear(d, ComplexMatrix(3, 1)), ShapeError);
}

TEST_CASE("solve_linear residual on random systems of size 1..64", "[numerics]") {
  std::mt19937_64 g(13);
  std::uniform_int_distribution<std::size_t> size(1, 64);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = size(g);
    const auto a = well_conditioned(n, g);
    const auto b = oracle::random_matrix(n, 2, g);
    const auto x = solve_linear(a, b);
    const double resid = frobenius_norm(a * x - b) /
                         (frobenius_norm(a) * frobenius_norm(x) + frobenius_norm(b));
    REQUIRE(resid <= 1e-10);
  }
}

TEST_CASE("solve_linear residual for a random 16x16 system", "[numerics]") {
  std::mt19937_64 g(14);
  const auto a = oracle::random_matrix(16, 16, g);
  const auto b = oracle::random_matrix(16, 1, g);
  CHECK(relative_error(a * solve_linear(a, b), b) < 1e-10);
}

TEST_CASE("singular matrices report the failing pivot", "[numerics]") {
  const ComplexMatrix s{{1.0, 2.0}, {2.0, 4.0}};
  try {
    solve_linear(s, ComplexMatrix::identity(2), "S");
    FAIL("expected SingularMatrixError");
  } catch (const SingularMatrixError& e) {
    CHECK(e.pivot_index() == 1);
    CHECK(e.expression() == "S");
  }
  CHECK_THROWS_AS(inverse(ComplexMatrix::zeros(3, 3)), SingularMatrixError);

  // Scale invariance: a tiny but regular matrix is not singular.
  const ComplexMatrix tiny = ComplexMatrix::identity(3) * Complex(1e-200);
  CHECK_NOTHROW(inverse(tiny));
}

TEST_CASE("inverse small cases and residual", "[numerics]") {
  CHECK(inverse(ComplexMatrix::identity(3)) == ComplexMatrix::identity(3));
  const ComplexMatrix swap{{0.0, 1.0}, {1.0, 0.0}};
  CHECK(inverse(swap) == swap);

  std::mt19937_64 g(15);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = oracle::random_hpd(8, g);
    CHECK(frobenius_norm(a * inverse(a) - ComplexMatrix::identity(8)) <= 1e-9 * 8);
    CHECK(relative_error(inverse(a), oracle::gauss_jordan_inverse(a)) < 1e-10);
  }
}

TEST_CASE("inverse of inverse returns the matrix", "[numerics]") {
  std::mt19937_64 g(16);
  for (int rep = 0; rep < 100; ++rep) {
    const auto a = well_conditioned(1 + rep % 20, g);
    CHECK(relative_error(inverse(inverse(a)), a) < 1e-8);
  }
}

TEST_CASE("factorization is deterministic", "[numerics]") {
  std::mt19937_64 g(17);
  const auto a = oracle::random_matrix(12, 12, g);
  const auto b = oracle::random_matrix(12, 3, g);
  const auto x1 = solve_linear(a, b), x2 = solve_linear(a, b);
  CHECK(x1 == x2);
}

TEST_CASE("Hermitian and positive definite checks", "[numerics]") {
  std::mt19937_64 g(18);
  const auto c = oracle::random_hpd(6, g);
  CHECK(is_hermitian(c));
  CHECK(is_positive_definite(c));
  CHECK_FALSE(is_positive_definite(ComplexMatrix::identity(2) * Complex(-1.0)));
  const ComplexMatrix skew{{1.0, j}, {j, 1.0}};
  CHECK_FALSE(is_hermitian(skew));
}

TEST_CASE("matrix construction rejects bad shapes", "[numerics]") {
  CHECK_THROWS_AS(ComplexMatrix(2, 2, std::vector<Complex>(3)), ShapeError);
  CHECK_THROWS_AS((ComplexMatrix{{1.0, 2.0}, {3.0}}), ShapeError);
  CHECK_THROWS_AS(ComplexMatrix(2, 2) + ComplexMatrix(2, 3), ShapeError);
}
