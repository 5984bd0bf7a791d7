#include <doctest.h>

#include <herdkit/oracle.hpp>
#include <herdkit/unisign.hpp>

#include "support/oracles.hpp"

using namespace herd;

namespace {

template <class S>
Mat<S> mat2(double a, double b, double c, double d) {
  Mat<S> M(2, 2);
  M << S(a), S(b), S(c), S(d);
  return M;
}

template <class S>
bool exact_ge_one(const Mat<S>& R, const Vec<S>& u) {
  Vec<S> r = R * u;
  for (Index i = 0; i < r.size(); ++i)
    if (r[i] < S(1)) return false;
  return true;
}

}  // namespace

TEST_CASE("nonzero pattern and unisign classification") {
  Vec<double> z(3);
  z << 0, 0, 0;
  CHECK(nonzero_pattern(z).empty());
  CHECK(!is_unisigned(z).has_value());

  Vec<double> v(3);
  v << 1, 0, -2;
  CHECK(nonzero_pattern(v) == std::vector<Index>{0, 2});
  CHECK(!is_unisigned(v).has_value());

  Vec<double> tiny(2);
  tiny << 1e-12, 3;  // below the default zero threshold
  CHECK(nonzero_pattern(tiny) == std::vector<Index>{1});
  CHECK(is_unisigned(tiny) == Sign::Positive);

  Vec<double> pos(3);
  pos << 0, 2, 5;
  CHECK(is_unisigned(pos) == Sign::Positive);
  Vec<double> neg(2);
  neg << -1, -4;
  CHECK(is_unisigned(neg) == Sign::Negative);
  Vec<double> mixed(2);
  mixed << 1, -1;
  CHECK(!is_unisigned(mixed).has_value());

  Vec<Rational> r(2);
  r << Rational(-3), Rational(0);
  CHECK(is_unisigned(r) == Sign::Negative);
}

TEST_CASE("column analysis collects unisigned columns and their rows") {
  Mat<double> M(3, 3);
  M << 1, 2, 0,
       0, -1, 0,
       2, 0, -5;
  UnisignAnalysis a = analyze_columns(M);
  CHECK(a.unisigned_cols == std::vector<Index>{0, 2});
  CHECK(a.column_sign[0] == Sign::Positive);
  CHECK(!a.column_sign[1].has_value());
  CHECK(a.column_sign[2] == Sign::Negative);
  CHECK(a.covered_rows == std::vector<Index>{0, 2});

  CHECK(!has_zero_row(M));
  Mat<double> Z(2, 2);
  Z << 1, 0, 0, 0;
  CHECK(has_zero_row(Z));
}

TEST_CASE("unisigned cover check: pinned small systems") {
  SUBCASE("identity accepts with the all-ones certificate") {
    Mat<double> I = Mat<double>::Identity(2, 2);
    Verdict<double> v = unisigned_cover_check(I);
    REQUIRE(v.status == Status::Herdable);
    REQUIRE(v.certificate.has_value());
    CHECK((*v.certificate)[0] == doctest::Approx(1.0));
    CHECK((*v.certificate)[1] == doctest::Approx(1.0));
  }
  SUBCASE("one covered row plus a patched row") {
    Mat<Rational> R = mat2<Rational>(1, 2, 0, -1);
    Verdict<Rational> v = unisigned_cover_check(R);
    REQUIRE(v.status == Status::Herdable);
    CHECK(exact_ge_one(R, *v.certificate));
  }
  SUBCASE("no unisigned column leaves the test undecided") {
    Mat<double> R = mat2<double>(1, -1, -1, 1);
    Verdict<double> v = unisigned_cover_check(R);
    CHECK(v.status == Status::Unknown);
    CHECK(v.detail == "unisigned columns cover 0 of 2 rows");
  }
  SUBCASE("zero row refuses immediately") {
    Mat<double> R = mat2<double>(1, 2, 0, 0);
    Verdict<double> v = unisigned_cover_check(R);
    CHECK(v.status == Status::Unknown);
    CHECK(v.detail == "a zero row makes the covering hypothesis fail");
  }
  Mat<double> empty;
  CHECK_THROWS_AS(unisigned_cover_check(empty), ArgumentError);
}

TEST_CASE("residual cover check: pinned small systems") {
  SUBCASE("two residual rows patched by one sign-uniform column") {
    Mat<Rational> R(3, 2);
    R << Rational(1), Rational(3),
         Rational(0), Rational(-2),
         Rational(0), Rational(-7);
    Verdict<Rational> v = residual_cover_check(R);
    REQUIRE(v.status == Status::Herdable);
    CHECK(exact_ge_one(R, *v.certificate));
  }
  SUBCASE("residual column mixing signs across residual rows refuses") {
    Mat<double> R(3, 2);
    R << 1, 3,
         0, -2,
         0, 7;
    Verdict<double> v = residual_cover_check(R);
    CHECK(v.status == Status::Unknown);
    CHECK(v.detail ==
          "row 2 has no sign-uniform column over the residual rows");
  }
  SUBCASE("full cover leaves no residual") {
    Mat<Rational> I = Mat<Rational>::Identity(3, 3);
    Verdict<Rational> v = residual_cover_check(I);
    REQUIRE(v.status == Status::Herdable);
    CHECK(exact_ge_one(I, *v.certificate));
  }
}

TEST_CASE("greedy elimination: pinned traces") {
  SUBCASE("two stages in column order") {
    Mat<Rational> R = mat2<Rational>(1, 2, 0, -1);
    EliminationTrace<Rational> trace;
    Verdict<Rational> v = greedy_check(R, kDefaultEps, &trace);
    REQUIRE(v.status == Status::Herdable);
    REQUIRE(trace.size() == 2);
    CHECK(trace[0].columns.size() == 1);
    CHECK(trace[0].columns[0].first == 0);
    CHECK(trace[0].columns[0].second == Rational(1));
    CHECK(trace[0].rows == std::vector<Index>{0});
    CHECK(trace[1].columns[0].first == 1);
    CHECK(trace[1].columns[0].second == Rational(-1));
    CHECK(trace[1].rows == std::vector<Index>{1});
    CHECK(exact_ge_one(R, *v.certificate));
  }
  SUBCASE("mixed columns stall with the remaining rows reported") {
    Mat<double> R = mat2<double>(1, -1, -1, 1);
    Verdict<double> v = greedy_check(R);
    CHECK(v.status == Status::Unknown);
    CHECK(v.detail == "no column is unisigned on the remaining rows {1,2}");
  }
  SUBCASE("a zero row can never be retired") {
    Mat<double> R = mat2<double>(1, 0, 0, 0);
    Verdict<double> v = greedy_check(R);
    CHECK(v.status == Status::Unknown);
    CHECK(v.detail == "no column is unisigned on the remaining rows {2}");
  }
}

TEST_CASE("certificate composition from explicit traces") {
  SUBCASE("single joint stage on the identity") {
    Mat<Rational> I = Mat<Rational>::Identity(2, 2);
    EliminationTrace<Rational> trace;
    trace.push_back({{{Index(0), Rational(1)}, {Index(1), Rational(1)}},
                     {Index(0), Index(1)}});
    Vec<Rational> u = compose_block_certificates(I, trace);
    CHECK(u[0] == Rational(1));
    CHECK(u[1] == Rational(1));
  }
  SUBCASE("staged triangular trace") {
    Mat<Rational> R = mat2<Rational>(1, 1, 0, 1);
    EliminationTrace<Rational> trace;
    trace.push_back({{{Index(0), Rational(1)}}, {Index(0)}});
    trace.push_back({{{Index(1), Rational(1)}}, {Index(1)}});
    Vec<Rational> u = compose_block_certificates(R, trace);
    CHECK(exact_ge_one(R, u));
  }
  SUBCASE("a wrong-sign stage exhausts the doubling budget") {
    Mat<Rational> R(1, 1);
    R << Rational(1);
    EliminationTrace<Rational> trace;
    trace.push_back({{{Index(0), Rational(-1)}}, {Index(0)}});
    CHECK_THROWS_AS(compose_block_certificates(R, trace),
                    CertificateAssemblyError);
  }
  SUBCASE("out-of-range trace entries are rejected") {
    Mat<Rational> R = Mat<Rational>::Identity(2, 2);
    EliminationTrace<Rational> bad_col;
    bad_col.push_back({{{Index(5), Rational(1)}}, {Index(0)}});
    CHECK_THROWS_AS(compose_block_certificates(R, bad_col),
                    CertificateAssemblyError);
    EliminationTrace<Rational> bad_row;
    bad_row.push_back({{{Index(0), Rational(1)}}, {Index(7)}});
    CHECK_THROWS_AS(compose_block_certificates(R, bad_row),
                    CertificateAssemblyError);
  }
}

TEST_CASE("structured checks are sound and monotone on random matrices") {
  auto g = testsupport::rng(4711);
  int cover_hits = 0, residual_hits = 0, greedy_hits = 0;
  for (int trial = 0; trial < 400; ++trial) {
    Index n = 1 + testsupport::rand_int(g, 0, 4);
    Index k = 1 + testsupport::rand_int(g, 0, 4);
    Mat<Rational> R =
        testsupport::random_int_matrix<Rational>(g, n, k, -3, 3);

    Verdict<Rational> cover = unisigned_cover_check(R);
    Verdict<Rational> residual = residual_cover_check(R);
    EliminationTrace<Rational> trace;
    Verdict<Rational> greedy = greedy_check(R, kDefaultEps, &trace);

    // Sound: every acceptance carries an exact certificate, so the LP and the
    // Fourier-Motzkin reference must both agree the system is feasible.
    for (const Verdict<Rational>* v : {&cover, &residual, &greedy}) {
      if (v->status == Status::Herdable) {
        REQUIRE(v->certificate.has_value());
        CHECK(exact_ge_one(R, *v->certificate));
        CHECK(testsupport::fm_feasible(R));
      }
    }
    // Monotone: the cover hypothesis implies the residual one, which the
    // greedy scan can always reproduce stage by stage.
    if (cover.status == Status::Herdable) {
      ++cover_hits;
      CHECK(residual.status == Status::Herdable);
    }
    if (residual.status == Status::Herdable) {
      ++residual_hits;
      CHECK(greedy.status == Status::Herdable);
    }
    if (greedy.status == Status::Herdable) ++greedy_hits;
  }
  // The sample must exercise the accepting paths, not just the refusals.
  CHECK(cover_hits > 20);
  CHECK(residual_hits >= cover_hits);
  CHECK(greedy_hits >= residual_hits);
}

TEST_CASE("greedy elimination is deterministic") {
  auto g = testsupport::rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    Mat<double> R = testsupport::random_int_matrix<double>(g, 4, 4, -2, 2);
    EliminationTrace<double> t1, t2;
    Verdict<double> v1 = greedy_check(R, kDefaultEps, &t1);
    Verdict<double> v2 = greedy_check(R, kDefaultEps, &t2);
    CHECK(v1.status == v2.status);
    CHECK(v1.detail == v2.detail);
    REQUIRE(t1.size() == t2.size());
    for (size_t s = 0; s < t1.size(); ++s) {
      CHECK(t1[s].columns == t2[s].columns);
      CHECK(t1[s].rows == t2[s].rows);
    }
    if (v1.certificate)
      CHECK(testsupport::same_vector(*v1.certificate, *v2.certificate));
  }
}

TEST_CASE("greedy refusal does not imply infeasibility") {
  // Feasible system on which every structured check stalls: u = (3, 2) gives
  // R u = (1, 1), yet neither column is unisigned.
  Mat<Rational> R = mat2<Rational>(1, -1, -1, 2);
  CHECK(greedy_check(R).status == Status::Unknown);
  CHECK(unisigned_cover_check(R).status == Status::Unknown);
  CHECK(residual_cover_check(R).status == Status::Unknown);
  auto lp = positive_image_feasible(R);
  CHECK(lp.feasible);
  Vec<Rational> u(2);
  u << Rational(3), Rational(2);
  CHECK(exact_ge_one(R, u));
}
