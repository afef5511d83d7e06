#pragma once

#include "cmdp/cmdp.hpp"
#include "cmdp/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cmdp {

namespace gridworld {
inline constexpr int rows = 5;
inline constexpr int cols = 5;
inline constexpr int n_actions = 4;
enum Action { north = 0, south = 1, east = 2, west = 3 };
inline constexpr int state_a = 0 * cols + 1;
inline constexpr int state_a_prime = 4 * cols + 1;
inline constexpr int state_b = 0 * cols + 3;
inline constexpr int state_b_prime = 2 * cols + 3;
inline constexpr double default_gamma = 0.9;
} // namespace gridworld

/**
 * 5x5 teleport gridworld. Every action in A (resp. B) moves to A' (resp. B')
 * with (r, c) = (1, 0.1) (resp. (0.5, 1)); all other moves are deterministic
 * with zero signals, and moves off the grid leave the agent in place.
 *
 * `b` defaults to half of max_pi J_c and `rho` to the uniform distribution.
 */
TabularCmdp make_gridworld(double gamma = gridworld::default_gamma, std::optional<double> b = std::nullopt,
                           std::optional<Vector> rho = std::nullopt);

/// Random CMDP: Dirichlet(1) transition rows, r and c uniform on [0, 1],
/// uniform rho, and b = J_c of the uniform policy (so the problem is feasible).
TabularCmdp make_random_cmdp(int n_states, int n_actions, double gamma, std::uint64_t seed);

struct EnvSpec {
    enum class Kind { gridworld, random };
    Kind kind = Kind::gridworld;
    double gamma = gridworld::default_gamma;
    /// Absolute threshold; when unset, b = b_fraction * max_pi J_c.
    std::optional<double> b;
    double b_fraction = 0.5;
    /// "uniform", "point" or "custom".
    std::string rho_kind = "uniform";
    std::vector<int> rho_states;
    std::vector<double> rho_custom;
    int n_states = 6;
    int n_actions = 3;
    std::uint64_t seed = 0;
};

/// Build the CMDP described by an EnvSpec.
TabularCmdp make_env(const EnvSpec& spec);

struct RolloutResult {
    double return_r = 0.0;
    double return_c = 0.0;
    std::vector<int> visited;
};

/// One trajectory of `horizon` steps: action `start.action` first, then actions
/// drawn from the policy. Returns truncated discounted sums of r and c.
RolloutResult sample_rollout(const TabularCmdp& cmdp, const Policy& policy, StateAction start, int horizon,
                             Rng& rng, bool record_visits = false);

} // namespace cmdp
