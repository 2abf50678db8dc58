#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dsv/geometry.hpp"
#include "helpers.hpp"
#include "oracle.hpp"

using dsv::EmbeddingSet;
using oracle::Mat;
using oracle::Vec;

TEST_CASE("vec_distance basics") {
    CHECK(dsv::vec_distance(Vec{0, 0}, Vec{0, 0}) == 0.0);
    CHECK(dsv::vec_distance(Vec{0, 0}, Vec{3, 4}) == 5.0);
    CHECK_THROWS_AS(dsv::vec_distance(Vec{1, 2}, Vec{1, 2, 3}), dsv::ValidationError);

    // random 8-dim vectors against the scalar-loop oracle
    for (int i = 0; i < 50; ++i) {
        const Vec a = testutil::random_vec(8, 10.0);
        const Vec b = testutil::random_vec(8, 10.0);
        CHECK(dsv::vec_distance(a, b) == Catch::Approx(oracle::dist(a, b)).epsilon(1e-13));
    }
}

TEST_CASE("set_distance worked examples") {
    CHECK(dsv::set_distance(testutil::to_set({{0, 0}}), testutil::to_set({{3, 4}})) == 5.0);

    const double expected = (3.0 + std::sqrt(13.0)) / 2.0;
    CHECK(dsv::set_distance(testutil::to_set({{0, 0}, {0, 2}}), testutil::to_set({{3, 0}})) ==
          Catch::Approx(expected).epsilon(1e-15));

    // d(A, A) keeps the zero-distance self pairs
    const EmbeddingSet same = testutil::to_set({{0, 0}, {2, 0}});
    CHECK(dsv::set_distance(same, same) == Catch::Approx(1.0));
}

TEST_CASE("set_distance errors") {
    const EmbeddingSet a = testutil::to_set({{1, 2}});
    CHECK_THROWS_AS(dsv::set_distance(a, EmbeddingSet{}), dsv::ValidationError);
    CHECK_THROWS_AS(dsv::set_distance(EmbeddingSet{}, a), dsv::ValidationError);
    CHECK_THROWS_AS(dsv::set_distance(a, testutil::to_set({{1, 2, 3}})), dsv::ValidationError);
}

TEST_CASE("set_distance matches brute force on random sets") {
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t dim = 1 + testutil::rng()() % 16;
        const std::size_t na = 1 + testutil::rng()() % 64;
        const std::size_t nb = 1 + testutil::rng()() % 64;
        const Mat a = testutil::random_mat(na, dim, 5.0);
        const Mat b = testutil::random_mat(nb, dim, 5.0);
        const double got = dsv::set_distance(testutil::to_set(a), testutil::to_set(b));
        CHECK(got == Catch::Approx(oracle::set_dist(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("set_distance symmetry and singleton triangle inequality") {
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t dim = 2 + testutil::rng()() % 6;
        const Mat a = testutil::random_mat(1 + testutil::rng()() % 8, dim);
        const Mat b = testutil::random_mat(1 + testutil::rng()() % 8, dim);
        CHECK(dsv::set_distance(testutil::to_set(a), testutil::to_set(b)) ==
              Catch::Approx(dsv::set_distance(testutil::to_set(b), testutil::to_set(a)))
                  .epsilon(1e-14));

        const Vec x = testutil::random_vec(dim), y = testutil::random_vec(dim),
                  z = testutil::random_vec(dim);
        const auto sx = testutil::to_set({x}), sy = testutil::to_set({y}), sz = testutil::to_set({z});
        CHECK(dsv::set_distance(sx, sz) <=
              dsv::set_distance(sx, sy) + dsv::set_distance(sy, sz) + 1e-12);
    }
}

TEST_CASE("projected_norm worked examples") {
    CHECK(dsv::projected_norm(Vec{0, 0}, Vec{2, 0}, Vec{2, 0}) == 2.0);
    CHECK(dsv::projected_norm(Vec{0, 0}, Vec{2, 0}, Vec{0, 1}) == 0.0);
    CHECK(dsv::projected_norm(Vec{0, 0}, Vec{2, 0}, Vec{1, 1}) == 1.0);
    CHECK_THROWS_AS(dsv::projected_norm(Vec{1, 1}, Vec{1, 1}, Vec{0, 0}), dsv::NumericError);
}

TEST_CASE("projected_norm bounded by the anchor distance") {
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t dim = 2 + testutil::rng()() % 8;
        const Vec a = testutil::random_vec(dim, 3.0);
        Vec b = testutil::random_vec(dim, 3.0);
        if (oracle::dist(a, b) == 0.0) b[0] += 1.0;
        const Vec c = testutil::random_vec(dim, 3.0);
        CHECK(dsv::projected_norm(a, b, c) <= dsv::vec_distance(a, c) + 1e-12);
        CHECK(dsv::projected_norm(a, b, c) == Catch::Approx(oracle::proj(a, b, c)).margin(1e-12));
    }
}

TEST_CASE("scale equivariance of distances and projections") {
    for (double lambda : {0.5, 4.0, 3.7}) {
        const Mat a = testutil::random_mat(6, 4), b = testutil::random_mat(5, 4);
        const double base = dsv::set_distance(testutil::to_set(a), testutil::to_set(b));
        const double scaled = dsv::set_distance(testutil::to_set(testutil::scale(a, lambda)),
                                                testutil::to_set(testutil::scale(b, lambda)));
        CHECK(scaled == Catch::Approx(lambda * base).epsilon(1e-12));

        const Vec x = testutil::random_vec(4), y = testutil::random_vec(4),
                  z = testutil::random_vec(4);
        const double p = dsv::projected_norm(x, y, z);
        const double ps = dsv::projected_norm(testutil::scale({x}, lambda)[0],
                                              testutil::scale({y}, lambda)[0],
                                              testutil::scale({z}, lambda)[0]);
        CHECK(ps == Catch::Approx(lambda * p).epsilon(1e-12).margin(1e-12));
    }
}

TEST_CASE("mean_vector") {
    CHECK(dsv::mean_vector(testutil::to_set({{1, 1}})) == Vec{1, 1});
    CHECK(dsv::mean_vector(testutil::to_set({{0, 0}, {2, 0}})) == Vec{1, 0});
    CHECK_THROWS_AS(dsv::mean_vector(EmbeddingSet{}), dsv::ValidationError);

    const Mat m = testutil::random_mat(5, 7);
    const Vec got = dsv::mean_vector(testutil::to_set(m));
    const Vec want = oracle::mean(m);
    for (std::size_t i = 0; i < want.size(); ++i)
        CHECK(got[i] == Catch::Approx(want[i]).margin(1e-14));
}

TEST_CASE("population_std") {
    CHECK(dsv::population_std(Vec{5, 5, 5}) == 0.0);
    CHECK(dsv::population_std(Vec{0, 2}) == 1.0);
    CHECK(dsv::population_std(Vec{1, 2, 3, 4}) == Catch::Approx(std::sqrt(1.25)).epsilon(1e-15));
    CHECK_THROWS_AS(dsv::population_std(Vec{}), dsv::ValidationError);
}

TEST_CASE("embedding set validation") {
    CHECK_THROWS_AS(testutil::to_set({}), dsv::ValidationError);
    EmbeddingSet set(3);
    CHECK_THROWS_AS(set.append(Vec{1, 2}), dsv::ValidationError);
    CHECK_THROWS_AS(set.append(Vec{1, 2, std::nan("")}), dsv::ValidationError);
    set.append(Vec{1, 2, 3});
    CHECK(set.size() == 1);
}
