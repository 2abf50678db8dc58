#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "dsv/baselines.hpp"
#include "helpers.hpp"
#include "oracle.hpp"

using dsv::ScoreMatrix;
using dsv::SelectorResult;
using oracle::Mat;
using oracle::Vec;
using testutil::to_set;

TEST_CASE("mmd basics") {
    const Mat a = testutil::random_mat(12, 3, 2.0);
    CHECK(dsv::mmd(to_set(a), to_set(a)) == Catch::Approx(0.0).margin(1e-7));

    // singleton closed form: sqrt(2 (1 - exp(-d^2 / (2 h^2)))), h = d
    const double d = 10.0;
    const double want = std::sqrt(2.0 * (1.0 - std::exp(-d * d / (2.0 * d * d))));
    CHECK(dsv::mmd(to_set({{0, 0}}), to_set({{10, 0}})) == Catch::Approx(want).epsilon(1e-12));

    CHECK_THROWS_AS(dsv::mmd(to_set({{1, 1}, {1, 1}}), to_set({{1, 1}})), dsv::NumericError);
}

TEST_CASE("mmd matches the quadratic-time oracle") {
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t dim = 2 + testutil::rng()() % 4;
        const Mat a = testutil::random_mat(2 + testutil::rng()() % 10, dim, 2.0);
        const Mat b = testutil::random_mat(2 + testutil::rng()() % 10, dim, 2.0);
        const double h = oracle::median_bandwidth(a, b);
        const double want = std::sqrt(std::max(0.0, oracle::mmd_squared(a, b, h)));
        CHECK(dsv::mmd(to_set(a), to_set(b)) == Catch::Approx(want).margin(1e-10));
    }
}

TEST_CASE("std criterion") {
    CHECK(dsv::std_criterion(to_set({{0, 0}}), to_set({{3, 4}, {3, 4}})) == 0.0);
    CHECK(dsv::std_criterion(to_set({{0, 0}}), to_set({{0, 0}, {2, 0}})) == 1.0);

    const Mat trn = testutil::random_mat(6, 3), test = testutil::random_mat(9, 3);
    Vec dists;
    for (const auto& t : trn)
        for (const auto& z : test) dists.push_back(oracle::dist(t, z));
    CHECK(dsv::std_criterion(to_set(trn), to_set(test)) ==
          Catch::Approx(oracle::pop_std(dists)).epsilon(1e-12));
}

TEST_CASE("random selector is deterministic and roughly uniform") {
    const SelectorResult once = dsv::select_random(4, 1234);
    const SelectorResult again = dsv::select_random(4, 1234);
    REQUIRE(once.chosen_index.has_value());
    CHECK(*once.chosen_index == *again.chosen_index);
    CHECK(*dsv::select_random(1, 99).chosen_index == 0);

    std::array<int, 4> counts{};
    const int draws = 100000;
    for (int i = 0; i < draws; ++i)
        ++counts[*dsv::select_random(4, static_cast<std::uint64_t>(i)).chosen_index];
    for (int c : counts)
        CHECK(std::fabs(static_cast<double>(c) / draws - 0.25) < 0.01);
}

TEST_CASE("mc centrality") {
    // two identical rows and one anti-correlated row
    const ScoreMatrix m = ScoreMatrix::from_rows({{1, 2, 3, 4}, {2, 4, 6, 8}, {4, 3, 2, 1}});
    const SelectorResult res = dsv::select_mc(m);
    CHECK(*res.chosen_index == 0);
    CHECK(res.criterion[0] == Catch::Approx(0.0).margin(1e-12));
    CHECK(res.criterion[2] == Catch::Approx(-1.0).epsilon(1e-12));

    // all rows identical: tie resolved to the lowest index
    const ScoreMatrix same = ScoreMatrix::from_rows({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}});
    CHECK(*dsv::select_mc(same).chosen_index == 0);

    // zero-variance row correlates with nothing
    const ScoreMatrix flat = ScoreMatrix::from_rows({{5, 5, 5}, {1, 2, 3}, {1.1, 2, 2.9}});
    const SelectorResult fres = dsv::select_mc(flat);
    CHECK(fres.criterion[0] == 0.0);
    CHECK(*fres.chosen_index >= 1);
}

TEST_CASE("mc matches a brute-force correlation table") {
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 3 + testutil::rng()() % 5;
        const std::size_t n = 5 + testutil::rng()() % 20;
        Mat rows = testutil::random_mat(k, n, 2.0);
        const SelectorResult res = dsv::select_mc(ScoreMatrix::from_rows(rows));
        for (std::size_t i = 0; i < k; ++i) {
            double want = 0.0;
            for (std::size_t j = 0; j < k; ++j)
                if (j != i) want += oracle::pearson(rows[i], rows[j]);
            want /= static_cast<double>(k - 1);
            CHECK(res.criterion[i] == Catch::Approx(want).margin(1e-10));
        }
    }
}

TEST_CASE("sel pseudo ground truth") {
    // row 1 equals the average row shape, rows 0 and 2 deviate
    const ScoreMatrix m = ScoreMatrix::from_rows({{0, 1, 4}, {0, 1, 2}, {2, 1, 0}});
    const SelectorResult res = dsv::select_sel(m);
    // z-scored rows: row0 ~ {-.98,-.21,1.19}, row1 {-1.22,0,1.22}, row2 {1.22,0,-1.22}
    // pseudo gt is dominated by row0's shape; row1 correlates most
    REQUIRE(res.chosen_index.has_value());
    CHECK(res.criterion[1] > res.criterion[2]);

    // mirror pair: pseudo ground truth vanishes, criteria are all zero
    const ScoreMatrix mirror = ScoreMatrix::from_rows({{1, 2, 3}, {3, 2, 1}});
    const SelectorResult mres = dsv::select_sel(mirror);
    CHECK(mres.criterion[0] == 0.0);
    CHECK(mres.criterion[1] == 0.0);
    CHECK(*mres.chosen_index == 0);
}

TEST_CASE("sel matches an independent recomputation") {
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + testutil::rng()() % 5;
        const std::size_t n = 4 + testutil::rng()() % 16;
        Mat rows = testutil::random_mat(k, n, 3.0);
        const SelectorResult res = dsv::select_sel(ScoreMatrix::from_rows(rows));
        // oracle: z-score rows, column means, pearson per row
        Mat z(k, Vec(n, 0.0));
        for (std::size_t i = 0; i < k; ++i) {
            const double mean = std::accumulate(rows[i].begin(), rows[i].end(), 0.0) / n;
            const double sd = oracle::pop_std(rows[i]);
            if (sd > 0)
                for (std::size_t j = 0; j < n; ++j) z[i][j] = (rows[i][j] - mean) / sd;
        }
        Vec pseudo(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < k; ++i) pseudo[j] += z[i][j];
            pseudo[j] /= static_cast<double>(k);
        }
        for (std::size_t i = 0; i < k; ++i)
            CHECK(res.criterion[i] == Catch::Approx(oracle::pearson(z[i], pseudo)).margin(1e-10));
    }
}

TEST_CASE("hits trivial cases") {
    const ScoreMatrix uniform = ScoreMatrix::from_rows({{0.7, 0.7}, {0.7, 0.7}, {0.7, 0.7}});
    const dsv::HitsResult ur = dsv::select_hits(uniform);
    CHECK(*ur.selection.chosen_index == 0);
    CHECK(ur.hub_scores[0] == Catch::Approx(ur.hub_scores[2]).epsilon(1e-12));

    const ScoreMatrix dominant = ScoreMatrix::from_rows({{0, 0, 0}, {0, 0, 0}, {1, 1, 1}});
    CHECK(*dsv::select_hits(dominant).selection.chosen_index == 2);

    CHECK_THROWS_AS(dsv::select_hits(ScoreMatrix::from_rows({{0, 0}, {0, 0}})),
                    dsv::NumericError);
}

TEST_CASE("hits converges and matches the power-iteration oracle") {
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 2 + testutil::rng()() % 6;
        const std::size_t n = 3 + testutil::rng()() % 12;
        Mat rows(k, Vec(n));
        for (auto& r : rows)
            for (double& v : r) v = testutil::uniform(0.0, 1.0);
        const dsv::HitsResult res = dsv::select_hits(ScoreMatrix::from_rows(rows));

        CHECK(res.deltas.back() < 1e-9);
        for (std::size_t i = 1; i < res.deltas.size(); ++i)
            CHECK(res.deltas[i] <= res.deltas[i - 1] + 1e-15);

        // normalize rows the same way to feed the oracle
        Mat w(k, Vec(n));
        for (std::size_t i = 0; i < k; ++i) {
            const auto [mn, mx] = std::minmax_element(rows[i].begin(), rows[i].end());
            for (std::size_t j = 0; j < n; ++j)
                w[i][j] = *mx > *mn ? (rows[i][j] - *mn) / (*mx - *mn)
                                    : std::clamp(rows[i][j], 0.0, 1.0);
        }
        const Vec hub = oracle::hub_eigenvector(w);
        for (std::size_t i = 0; i < k; ++i)
            CHECK(res.hub_scores[i] == Catch::Approx(hub[i]).margin(1e-6));
    }
}

TEST_CASE("selector criteria are invariant to per-row affine rescaling") {
    const std::size_t k = 4, n = 12;
    Mat rows = testutil::random_mat(k, n, 2.0);
    Mat rescaled = rows;
    for (std::size_t i = 0; i < k; ++i) {
        const double a = testutil::uniform(0.5, 4.0);
        const double b = testutil::uniform(-3.0, 3.0);
        for (double& v : rescaled[i]) v = a * v + b;
    }
    const SelectorResult mc1 = dsv::select_mc(ScoreMatrix::from_rows(rows));
    const SelectorResult mc2 = dsv::select_mc(ScoreMatrix::from_rows(rescaled));
    const SelectorResult sel1 = dsv::select_sel(ScoreMatrix::from_rows(rows));
    const SelectorResult sel2 = dsv::select_sel(ScoreMatrix::from_rows(rescaled));
    for (std::size_t i = 0; i < k; ++i) {
        CHECK(mc1.criterion[i] == Catch::Approx(mc2.criterion[i]).margin(1e-10));
        CHECK(sel1.criterion[i] == Catch::Approx(sel2.criterion[i]).margin(1e-10));
    }
}

TEST_CASE("permutation equivariance of score-based selectors") {
    const std::size_t k = 5, n = 10;
    const Mat rows = testutil::random_mat(k, n, 2.0);
    const std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
    Mat permuted(k);
    for (std::size_t i = 0; i < k; ++i) permuted[i] = rows[perm[i]];

    for (auto select : {+[](const ScoreMatrix& m) { return dsv::select_mc(m); },
                        +[](const ScoreMatrix& m) { return dsv::select_sel(m); },
                        +[](const ScoreMatrix& m) { return dsv::select_hits(m).selection; }}) {
        const SelectorResult base = select(ScoreMatrix::from_rows(rows));
        const SelectorResult moved = select(ScoreMatrix::from_rows(permuted));
        for (std::size_t i = 0; i < k; ++i)
            CHECK(moved.criterion[i] == Catch::Approx(base.criterion[perm[i]]).margin(1e-9));
    }
}

TEST_CASE("argbest tie and nan handling") {
    using dsv::argbest;
    const Vec vals = {std::nan(""), 2.0, 1.0, 1.0};
    CHECK(*argbest(vals, SelectorResult::Direction::minimize) == 2);
    CHECK(*argbest(Vec{1.0, 1.0}, SelectorResult::Direction::maximize) == 0);
    CHECK_FALSE(argbest(Vec{std::nan("")}, SelectorResult::Direction::minimize).has_value());
}

TEST_CASE("mmd criterion favors a candidate whose test matches the pooled sets") {
    // test drawn literally from the train/aug pool drives the numerator down
    std::mt19937_64 gen(808);
    auto draw = [&](std::size_t rows) {
        Mat m(rows, Vec(3));
        for (auto& r : m)
            for (double& v : r) v = 4.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 2.0;
        return m;
    };
    const Mat trn = draw(10), aug = draw(10);
    Mat matched;
    for (std::size_t i = 0; i < trn.size(); i += 2) matched.push_back(trn[i]);
    for (std::size_t i = 0; i < aug.size(); i += 2) matched.push_back(aug[i]);
    Vec offset(3, 25.0);
    const Mat displaced = testutil::translate(matched, offset);

    const double good = dsv::mmd_criterion(to_set(trn), to_set(aug), to_set(matched));
    const double bad = dsv::mmd_criterion(to_set(trn), to_set(aug), to_set(displaced));
    CHECK(good < bad);
    CHECK(good < 0.5);
}
