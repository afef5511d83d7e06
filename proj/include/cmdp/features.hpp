#pragma once

#include "cmdp/cmdp.hpp"

#include <array>
#include <string_view>
#include <vector>

namespace cmdp {

enum class FeatureKind { one_hot, tile_coding, dense };

std::string_view to_string(FeatureKind kind);

/// Row-major grid cell of a state: s = row * cols + col.
struct GridShape {
    int rows = 0;
    int cols = 0;
};

struct TileCodingParams {
    GridShape grid;
    int n_actions = 0;
    /// Tile extent in cells, {rows, cols}.
    std::array<int, 2> tile_size{1, 1};
    int n_tilings = 1;
    /// Per-tiling cell offsets {row, col}. Empty selects the default floor(k * tile / n_tilings).
    std::vector<std::array<int, 2>> offsets;
};

/**
 * Linear feature map phi : S x A -> R^d.
 *
 * The full design matrix is materialised at construction (one row per pair,
 * ordered s * A + a), so `featurize` is a lookup and bit-for-bit repeatable.
 */
class FeatureMap {
  public:
    FeatureMap(FeatureKind kind, int n_states, int n_actions, Matrix design, int n_active = 1);

    FeatureKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return static_cast<int>(design_.cols()); }
    int n_states() const noexcept { return n_states_; }
    int n_actions() const noexcept { return n_actions_; }
    /// Number of ones per feature vector for binary maps (tilings for tile coding).
    int n_active() const noexcept { return n_active_; }

    Vector featurize(int s, int a) const { return design_.row(s * n_actions_ + a).transpose(); }
    auto row(int pair_index) const { return design_.row(pair_index); }
    /// All feature vectors stacked, (S*A) x d.
    const Matrix& design() const noexcept { return design_; }

  private:
    FeatureKind kind_;
    int n_states_;
    int n_actions_;
    Matrix design_;
    int n_active_;
};

/// Tabular features: d = S*A with a single 1 at index s*A + a.
FeatureMap build_one_hot(int n_states, int n_actions);

/**
 * Grid tile coding with a separate block of tiles per action.
 *
 * Each tiling covers the grid with tiles of `tile_size` cells shifted by its
 * offset; cell (r, c) falls in tile floor((r + off_r) / tile_r), floor((c + off_c) / tile_c).
 * Every tiling allocates the same number of tiles, enough for the largest
 * offset, so d = n_tilings * tiles_per_tiling * n_actions.
 */
FeatureMap build_tile_coding(const TileCodingParams& params);

/// Tiles allocated per tiling for the given parameters (after defaulting offsets).
int tiles_per_tiling(const TileCodingParams& params);

/// Features drawn i.i.d. standard normal; used by property tests and LFA experiments.
FeatureMap build_random_features(int n_states, int n_actions, int dim, unsigned long long seed);

} // namespace cmdp
