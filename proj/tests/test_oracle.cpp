#include <doctest.h>

#include "herdkit/oracle.hpp"
#include "support/oracles.hpp"

using herd::Index;
using herd::Mat;
using herd::Rational;
using herd::Status;
using herd::Vec;

TEST_CASE("feasibility: pinned small cases") {
  Mat<double> I2 = Mat<double>::Identity(2, 2);
  auto r1 = herd::positive_image_feasible(I2);
  CHECK(r1.feasible);
  CHECK(herd::verify_certificate(I2, r1.point));

  Mat<double> opp(2, 1);
  opp << 1, -1;
  auto r2 = herd::positive_image_feasible(opp);
  CHECK_FALSE(r2.feasible);
  REQUIRE(r2.farkas.size() == 2);
  // The dual here is forced: y1 = y2 = 1.
  CHECK(r2.farkas[0] == doctest::Approx(1.0));
  CHECK(r2.farkas[1] == doctest::Approx(1.0));
  CHECK(std::abs((r2.farkas.transpose() * opp)(0, 0)) < 1e-9);

  Mat<double> M(2, 2);
  M << 1, -2, -1, 3;
  auto r3 = herd::positive_image_feasible(M);
  CHECK(r3.feasible);
  CHECK(herd::verify_certificate(M, r3.point));
}

TEST_CASE("certificate verifier thresholds") {
  Mat<double> I2 = Mat<double>::Identity(2, 2);
  Vec<double> good(2), bad(2);
  good << 1, 1;
  bad << 1, 0;
  CHECK(herd::verify_certificate(I2, good));
  CHECK_FALSE(herd::verify_certificate(I2, bad));
  Mat<double> M(2, 2);
  M << 1, -2, -1, 3;
  Vec<double> u(2);
  u << 5, 2;
  CHECK(herd::verify_certificate(M, u));
  Vec<double> short_u(1);
  CHECK_THROWS_AS(herd::verify_certificate(M, short_u), herd::DimensionError);
}

TEST_CASE("pair decision: pinned small cases") {
  Mat<double> zero2 = Mat<double>::Zero(2, 2);
  Mat<double> ones(2, 1);
  ones << 1, 1;
  auto v1 = herd::herdable(zero2, ones);
  CHECK(v1.status == Status::Herdable);

  Mat<double> e1 = Mat<double>::Zero(2, 1);
  e1(0, 0) = 1;
  auto v2 = herd::herdable(zero2, e1);
  CHECK(v2.status == Status::NotHerdable);
  REQUIRE(v2.witness.has_value());
  CHECK((*v2.witness)[1] == 1.0);  // canonical zero-row witness

  Mat<double> swap(2, 2);
  swap << 0, 1, 1, 0;
  auto v3 = herd::herdable(swap, e1);
  CHECK(v3.status == Status::Herdable);
  CHECK(herd::verify_certificate(herd::reachability_matrix(swap, e1),
                                 *v3.certificate));
}

TEST_CASE("exact mode decides rationally") {
  Mat<Rational> M(2, 2);
  M << Rational(1), Rational(-2), Rational(-1), Rational(3);
  auto r = herd::positive_image_feasible(M);
  CHECK(r.feasible);
  Vec<Rational> prod = M * r.point;
  for (Index i = 0; i < 2; ++i) CHECK(prod[i] >= Rational(1));
}

TEST_CASE("infeasible duals are genuine Farkas certificates") {
  auto g = testsupport::rng(404);
  int infeasible_seen = 0;
  for (int trial = 0; trial < 400; ++trial) {
    Index n = 1 + trial % 3, k = 1 + (trial / 3) % 3;
    auto M = testsupport::random_int_matrix<Rational>(g, n, k, -2, 2);
    auto r = herd::positive_image_feasible(M);
    if (r.feasible) {
      Vec<Rational> prod = M * r.point;
      for (Index i = 0; i < n; ++i) CHECK(prod[i] >= Rational(1));
    } else {
      ++infeasible_seen;
      Rational total(0);
      for (Index i = 0; i < n; ++i) {
        CHECK(r.farkas[i] >= Rational(0));
        total += r.farkas[i];
      }
      CHECK(total > Rational(0));
      Vec<Rational> back = M.transpose() * r.farkas;
      for (Index j = 0; j < k; ++j) CHECK(back[j] == Rational(0));
    }
  }
  CHECK(infeasible_seen > 0);
}

TEST_CASE("agreement with an independent elimination decision") {
  auto g = testsupport::rng(505);
  for (int trial = 0; trial < 300; ++trial) {
    Index n = 1 + trial % 3, k = 1 + (trial / 2) % 3;
    auto M = testsupport::random_int_matrix<Rational>(g, n, k, -2, 2);
    auto lp = herd::positive_image_feasible(M);
    CHECK(lp.feasible == testsupport::fm_feasible(M));
  }
}

TEST_CASE("grid hits imply feasibility (one-sided sanity)") {
  auto g = testsupport::rng(606);
  for (int trial = 0; trial < 60; ++trial) {
    Index n = 1 + trial % 3, k = 1 + (trial / 3) % 2;
    auto M = testsupport::random_int_matrix<double>(g, n, k, -2, 2);
    if (testsupport::grid_hits_feasible(M, 3.0, 12))
      CHECK(herd::positive_image_feasible(M).feasible);
  }
}

TEST_CASE("status is scale and column-permutation invariant") {
  auto g = testsupport::rng(707);
  for (int trial = 0; trial < 100; ++trial) {
    Index n = 1 + trial % 3, k = 1 + (trial / 2) % 3;
    auto M = testsupport::random_int_matrix<double>(g, n, k, -2, 2);
    auto base = herd::positive_image_feasible(M);

    Mat<double> D = Mat<double>::Zero(n, n);
    for (Index i = 0; i < n; ++i) D(i, i) = 1 + testsupport::rand_int(g, 0, 4);
    auto scaled = herd::positive_image_feasible(Mat<double>(D * M));
    CHECK(base.feasible == scaled.feasible);

    std::vector<Index> perm = herd::identity_permutation(k);
    std::shuffle(perm.begin(), perm.end(), g);
    Mat<double> P(k, k);
    P.setZero();
    for (Index j = 0; j < k; ++j) P(perm[j], j) = 1;
    auto permuted = herd::positive_image_feasible(Mat<double>(M * P));
    CHECK(base.feasible == permuted.feasible);
  }
}

TEST_CASE("non-finite input is rejected") {
  Mat<double> M(1, 1);
  M(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(herd::positive_image_feasible(M), herd::NumericError);
  Mat<double> empty(0, 0);
  CHECK_THROWS_AS(herd::positive_image_feasible(empty), herd::ArgumentError);
}
