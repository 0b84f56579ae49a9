#include <doctest.h>

#include <random>
#include <sstream>

#include "ftk/matrix_market.hpp"
#include "oracles.hpp"

using namespace ftk;

TEST_SUITE("matrix-market") {

TEST_CASE("2x2 coordinate fixture loads as diag(5,7)") {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate real general\n"
      "% hand-written fixture\n"
      "2 2 2\n"
      "1 1 5.0\n"
      "2 2 7.0\n");
  const CsrMatrix A = read_matrix_market(in);
  CHECK(A.nrows == 2);
  CHECK(A.ncols == 2);
  CHECK(A.nnz() == 2);
  CHECK(A.values == std::vector<double>{5.0, 7.0});
  CHECK(A.col_idx == std::vector<index_t>{0, 1});
}

TEST_CASE("symmetric storage is mirrored to general") {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "3 3 3\n"
      "1 1 2.0\n"
      "3 1 4.0\n"
      "3 3 6.0\n");
  const CsrMatrix A = read_matrix_market(in);
  CHECK(A.nnz() == 4);  // the off-diagonal entry appears twice
  const Eigen::MatrixXd M = oracle::to_eigen(A);
  CHECK(M(0, 2) == 4.0);
  CHECK(M(2, 0) == 4.0);
  CHECK(M(0, 0) == 2.0);
  CHECK(M(2, 2) == 6.0);
}

TEST_CASE("duplicate coordinates are summed") {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate real general\n"
      "2 2 3\n"
      "1 1 1.5\n"
      "1 1 2.5\n"
      "2 2 1.0\n");
  const CsrMatrix A = read_matrix_market(in);
  CHECK(A.nnz() == 2);
  CHECK(A.values[0] == 4.0);
}

TEST_CASE("write and re-read round-trips exactly") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const CsrMatrix A = oracle::random_sparse(rng, 30, 0.1);
    std::ostringstream out;
    write_matrix_market(out, A);
    std::istringstream in(out.str());
    const CsrMatrix B = read_matrix_market(in);
    CHECK(A == B);
  }
}

TEST_CASE("malformed inputs report the offending line") {
  auto expect_error_at = [](const std::string& text, long line) {
    std::istringstream in(text);
    try {
      (void)read_matrix_market(in);
      FAIL("expected MatrixMarketError");
    } catch (const MatrixMarketError& e) {
      CHECK(e.line() == line);
    }
  };
  expect_error_at("%%MatrixMarket matrix array real general\n2 2 4\n", 1);
  expect_error_at("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n", 1);
  expect_error_at("%%MatrixMarket matrix coordinate complex general\n2 2 1\n", 1);
  expect_error_at(
      "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n", 3);
  expect_error_at(
      "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n", 3);
  expect_error_at("not a header\n", 1);
}

TEST_CASE("skew-symmetric and hermitian banners are rejected") {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 1.0\n");
  CHECK_THROWS_AS((void)read_matrix_market(in), MatrixMarketError);
}

TEST_CASE("missing file reports an error") {
  CHECK_THROWS_AS((void)read_matrix_market_file("/nonexistent/path.mtx"),
                  MatrixMarketError);
}

}  // TEST_SUITE
