#include "cmdp/design.hpp"
#include "cmdp/errors.hpp"
#include "cmdp/features.hpp"

#include <doctest.h>

#include <cmath>

using namespace cmdp;

namespace {

TileCodingParams grid_params(std::array<int, 2> tile, int tilings, std::vector<std::array<int, 2>> offsets = {}) {
    TileCodingParams p;
    p.grid = {5, 5};
    p.n_actions = 4;
    p.tile_size = tile;
    p.n_tilings = tilings;
    p.offsets = std::move(offsets);
    return p;
}

} // namespace

TEST_CASE("one-hot features are the identity") {
    const FeatureMap f = build_one_hot(3, 2);
    CHECK(f.dim() == 6);
    CHECK(f.featurize(1, 1)(3) == 1.0);
    CHECK(f.featurize(1, 1).sum() == 1.0);
    CHECK(f.kind() == FeatureKind::one_hot);
}

TEST_CASE("tile coding dimensions for the gridworld") {
    CHECK(build_tile_coding(grid_params({3, 1}, 1)).dim() == 40);
    CHECK(build_tile_coding(grid_params({3, 1}, 2)).dim() == 80);
    CHECK(build_tile_coding(grid_params({5, 1}, 2, {{0, 0}, {0, 2}})).dim() == 56);
    CHECK(tiles_per_tiling(grid_params({3, 1}, 1)) == 10);
}

TEST_CASE("tile coding activates one tile per tiling inside the action block") {
    const FeatureMap f = build_tile_coding(grid_params({3, 1}, 2));
    const int per_action = f.dim() / 4;
    for (int s = 0; s < 25; ++s)
        for (int a = 0; a < 4; ++a) {
            const Vector phi = f.featurize(s, a);
            CHECK(phi.sum() == 2.0);
            CHECK(phi.segment(a * per_action, per_action).sum() == 2.0);
        }
    // Offsets (0,0),(1,0): rows 0 and 1 share both tiles, row 2 moves to the next tile of the second tiling.
    CHECK(f.featurize(0, 0) == f.featurize(5, 0));
    CHECK(f.featurize(5, 0) != f.featurize(10, 0));
}

TEST_CASE("tile coding rejects bad parameters") {
    CHECK_THROWS_AS(build_tile_coding(grid_params({0, 1}, 1)), InvalidArgument);
    CHECK_THROWS_AS(build_tile_coding(grid_params({3, 1}, 2, {{0, 0}})), InvalidArgument);
    CHECK_THROWS_AS(build_tile_coding(grid_params({3, 1}, 1, {{-1, 0}})), InvalidArgument);
}

TEST_CASE("random features are reproducible") {
    CHECK(build_random_features(4, 2, 3, 9).design() == build_random_features(4, 2, 3, 9).design());
    CHECK(build_random_features(4, 2, 3, 9).design() != build_random_features(4, 2, 3, 10).design());
}

TEST_CASE("coreset on one-hot features takes every coordinate once") {
    const FeatureMap f = build_one_hot(4, 3);
    const Coreset c = build_coreset(f, 0.8, 1.0);
    CHECK(c.size() == 12);
    std::vector<int> sorted = c.points;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 12; ++i) CHECK(sorted[i] == i);
    // Lowest index first on ties.
    CHECK(c.points.front() == 0);
    CHECK(c.sup_leverage == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(c.omega.sum() == doctest::Approx(1.0));
}

TEST_CASE("coreset is empty when the tolerance exceeds every initial leverage") {
    const FeatureMap f = build_one_hot(3, 2);
    CHECK(build_coreset(f, 1.0 + 1e-9, 1.0).size() == 0);
    CHECK(build_coreset(f, 0.999, 1.0).size() == 6);
}

TEST_CASE("Sherman-Morrison updates track the direct inverse") {
    TileCodingParams p = grid_params({3, 1}, 1);
    const FeatureMap f = build_tile_coding(p);
    double worst = 0.0;
    double prev_gain = 1e9;
    bool monotone = true;
    const Coreset c = build_coreset(f, 0.75, 1.0, [&](const Coreset& core, int) {
        const Matrix direct = regularized_gram(core, f).inverse();
        worst = std::max(worst, (direct - core.ginv).norm());
        const Matrix prod = core.ginv * regularized_gram(core, f);
        worst = std::max(worst, (prod - Matrix::Identity(f.dim(), f.dim())).norm());
    });
    for (double g : c.gain_history) {
        monotone = monotone && g <= prev_gain + 1e-12;
        prev_gain = g;
    }
    CHECK(worst < 1e-8);
    CHECK(monotone);
    CHECK(all_leverages(c, f).maxCoeff() <= 0.75);
    CHECK(c.size() == 40);
    CHECK_FALSE(c.hit_cap);
}

TEST_CASE("leverage matches a direct quadratic form") {
    const FeatureMap f = build_random_features(5, 2, 4, 3);
    const Coreset c = build_coreset(f, 0.3, 1.0);
    const Matrix inv = regularized_gram(c, f).inverse();
    for (int z = 0; z < 10; ++z) {
        const Vector phi = f.row(z).transpose();
        CHECK(leverage(c, phi) == doctest::Approx(std::sqrt(phi.dot(inv * phi))).epsilon(1e-8));
    }
    CHECK(leverage(c, Vector::Zero(4)) == 0.0);
    Coreset empty;
    empty.nu = 1.0;
    empty.ginv = Matrix::Identity(4, 4);
    Vector unit = Vector::Zero(4);
    unit(2) = 1.0;
    CHECK(leverage(empty, unit) == doctest::Approx(1.0));
}

TEST_CASE("build_coreset validates arguments") {
    const FeatureMap f = build_one_hot(2, 2);
    CHECK_THROWS_AS(build_coreset(f, 0.0), InvalidArgument);
    CHECK_THROWS_AS(build_coreset(f, 0.5, 0.0), InvalidArgument);
}

TEST_CASE("pseudo-inverse of a singular PSD matrix") {
    Matrix m = Matrix::Zero(3, 3);
    m(0, 0) = 2.0;
    m(1, 1) = 4.0;
    const Matrix p = psd_pseudo_inverse(m);
    CHECK(p(0, 0) == doctest::Approx(0.5));
    CHECK(p(1, 1) == doctest::Approx(0.25));
    CHECK(p(2, 2) == 0.0);
    CHECK((m * p * m - m).norm() < 1e-12);
}
