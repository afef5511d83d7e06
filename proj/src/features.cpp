#include "cmdp/features.hpp"

#include "cmdp/errors.hpp"
#include "cmdp/rng.hpp"

#include <algorithm>

namespace cmdp {

std::string_view to_string(FeatureKind kind) {
    switch (kind) {
    case FeatureKind::one_hot:
        return "one_hot";
    case FeatureKind::tile_coding:
        return "tile_coding";
    case FeatureKind::dense:
        return "dense";
    }
    return "unknown";
}

FeatureMap::FeatureMap(FeatureKind kind, int n_states, int n_actions, Matrix design, int n_active)
    : kind_(kind), n_states_(n_states), n_actions_(n_actions), design_(std::move(design)), n_active_(n_active) {
    if (n_states_ <= 0 || n_actions_ <= 0) throw InvalidArgument("feature map needs positive S and A");
    if (design_.rows() != static_cast<Eigen::Index>(n_states_) * n_actions_ || design_.cols() == 0)
        throw InvalidArgument("design matrix must be (S*A) x d with d > 0");
    if (!design_.allFinite()) throw InvalidArgument("features must be finite");
}

FeatureMap build_one_hot(int n_states, int n_actions) {
    if (n_states <= 0 || n_actions <= 0) throw InvalidArgument("one-hot features need positive S and A");
    const int d = n_states * n_actions;
    return FeatureMap(FeatureKind::one_hot, n_states, n_actions, Matrix::Identity(d, d), 1);
}

namespace {

std::vector<std::array<int, 2>> resolved_offsets(const TileCodingParams& p) {
    if (!p.offsets.empty()) {
        if (static_cast<int>(p.offsets.size()) != p.n_tilings)
            throw InvalidArgument("tile coding needs one offset per tiling");
        for (const auto& o : p.offsets)
            if (o[0] < 0 || o[1] < 0) throw InvalidArgument("tile offsets must be nonnegative");
        return p.offsets;
    }
    std::vector<std::array<int, 2>> out;
    for (int k = 0; k < p.n_tilings; ++k)
        out.push_back({k * p.tile_size[0] / p.n_tilings, k * p.tile_size[1] / p.n_tilings});
    return out;
}

void check_params(const TileCodingParams& p) {
    if (p.grid.rows <= 0 || p.grid.cols <= 0) throw InvalidArgument("tile coding grid must be non-empty");
    if (p.n_actions <= 0) throw InvalidArgument("tile coding needs positive action count");
    if (p.tile_size[0] <= 0 || p.tile_size[1] <= 0) throw InvalidArgument("tile size must be positive");
    if (p.n_tilings <= 0) throw InvalidArgument("number of tilings must be positive");
}

std::array<int, 2> tiles_per_dim(const TileCodingParams& p, const std::vector<std::array<int, 2>>& offsets) {
    int max_r = 0;
    int max_c = 0;
    for (const auto& o : offsets) {
        max_r = std::max(max_r, o[0]);
        max_c = std::max(max_c, o[1]);
    }
    return {(p.grid.rows - 1 + max_r) / p.tile_size[0] + 1, (p.grid.cols - 1 + max_c) / p.tile_size[1] + 1};
}

} // namespace

int tiles_per_tiling(const TileCodingParams& params) {
    check_params(params);
    const auto dims = tiles_per_dim(params, resolved_offsets(params));
    return dims[0] * dims[1];
}

FeatureMap build_tile_coding(const TileCodingParams& params) {
    check_params(params);
    const auto offsets = resolved_offsets(params);
    const auto dims = tiles_per_dim(params, offsets);
    const int per_tiling = dims[0] * dims[1];
    const int per_action = per_tiling * params.n_tilings;
    const int d = per_action * params.n_actions;
    const int S = params.grid.rows * params.grid.cols;
    const int A = params.n_actions;

    Matrix design = Matrix::Zero(static_cast<Eigen::Index>(S) * A, d);
    for (int s = 0; s < S; ++s) {
        const int r = s / params.grid.cols;
        const int c = s % params.grid.cols;
        for (int k = 0; k < params.n_tilings; ++k) {
            const int tr = (r + offsets[k][0]) / params.tile_size[0];
            const int tc = (c + offsets[k][1]) / params.tile_size[1];
            const int tile = k * per_tiling + tr * dims[1] + tc;
            for (int a = 0; a < A; ++a) design(s * A + a, a * per_action + tile) = 1.0;
        }
    }
    return FeatureMap(FeatureKind::tile_coding, S, A, std::move(design), params.n_tilings);
}

FeatureMap build_random_features(int n_states, int n_actions, int dim, unsigned long long seed) {
    if (dim <= 0) throw InvalidArgument("feature dimension must be positive");
    Rng rng(seed);
    Matrix design(static_cast<Eigen::Index>(n_states) * n_actions, dim);
    for (Eigen::Index i = 0; i < design.rows(); ++i)
        for (Eigen::Index j = 0; j < design.cols(); ++j) design(i, j) = rng.normal();
    return FeatureMap(FeatureKind::dense, n_states, n_actions, std::move(design), 0);
}

} // namespace cmdp
