#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "sbglsu/errors.hpp"
#include "sbglsu/hsi_core.hpp"

using namespace sbglsu;

TEST_CASE("single pixel cube becomes one column") {
  const HsiCube cube(1, 1, 3, {1.5, -2.0, 3.25});
  const Matrix y = cube_to_matrix(cube);
  REQUIRE(y.rows() == 3);
  REQUIRE(y.cols() == 1);
  CHECK(y(0, 0) == 1.5);
  CHECK(y(1, 0) == -2.0);
  CHECK(y(2, 0) == 3.25);
}

TEST_CASE("pixels are ordered row-major") {
  const HsiCube pair(1, 2, 1, {10.0, 20.0});
  const Matrix y = cube_to_matrix(pair);
  CHECK(y(0, 0) == 10.0);
  CHECK(y(0, 1) == 20.0);

  // 2x2 grid, one band: value encodes (row, col).
  const HsiCube grid(2, 2, 1, {0.0, 1.0, 10.0, 11.0});
  const Matrix g = cube_to_matrix(grid);
  CHECK(g(0, 2) == 10.0);  // pixel (1, 0) is column 2
  CHECK(grid.at(1, 0, 0) == 10.0);
  CHECK(pixel_index(1, 0, 2) == 2);
}

TEST_CASE("cube/matrix round trip is the identity") {
  std::mt19937_64 gen(3);
  const Matrix m = oracle::random_matrix(gen, 6, 20);
  const HsiCube cube = matrix_to_cube(m, 4, 5);
  CHECK(cube.height() == 4);
  CHECK(cube.width() == 5);
  CHECK(cube.bands() == 6);
  CHECK(cube_to_matrix(cube) == m);
  const HsiCube again = matrix_to_cube(cube_to_matrix(cube), 4, 5);
  CHECK(std::equal(again.data().begin(), again.data().end(), cube.data().begin()));
}

TEST_CASE("shape and validity errors") {
  CHECK_THROWS_AS(matrix_to_cube(Matrix::Zero(3, 5), 2, 2), ShapeError);
  CHECK_THROWS_AS(HsiCube(2, 2, 2, std::vector<double>(7, 0.0)), ShapeError);
  CHECK_THROWS_AS(HsiCube(1, 1, 1, {std::nan("")}), ParameterError);
  CHECK_THROWS_AS(SpectralLibrary(Matrix::Zero(3, 1), {"flat"}), ParameterError);
  CHECK_THROWS_AS(SpectralLibrary(Matrix::Ones(3, 2), {"only-one"}), ShapeError);
  CHECK_THROWS_AS(SpectralLibrary(Matrix(3, 0), {}), ParameterError);
}
