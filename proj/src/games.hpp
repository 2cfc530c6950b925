// games.hpp — finite two-player game arenas and solvers.
//
// Positions are dense integer ids. The owner map may be partial: a position
// needs an owner only when its out-degree differs from 1 (a single forced
// move belongs to nobody). A player who must move but cannot loses
// immediately. Winning conditions: reachability, Buchi, co-Buchi and weak
// parity (priorities constant on strongly connected components).

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace afmc {

enum class Player : uint8_t { Exists, Forall };
inline Player opponent(Player p) {
    return p == Player::Exists ? Player::Forall : Player::Exists;
}

enum class WinKind : uint8_t { Reachability, Buchi, CoBuchi, WeakParity };

struct GameArena {
    int n = 0;                              // positions are 0..n-1
    std::vector<std::vector<int>> moves;    // successor lists
    std::vector<std::optional<Player>> owner;
    int initial = 0;
    WinKind kind = WinKind::Buchi;
    // Reachability: Exists wins a play iff it visits `mark`.
    // Buchi: Exists wins an infinite play iff it visits `mark` infinitely often.
    // CoBuchi: Exists wins an infinite play iff it visits `mark` finitely often.
    std::vector<bool> mark;
    // WeakParity only: Exists wins an infinite play iff the maximal priority
    // seen infinitely often is even. Must be constant on SCCs.
    std::vector<int> priority;

    void validate() const;  // throws std::invalid_argument on bad arenas
};

struct Solution {
    std::vector<Player> winner;          // per position
    // Positional strategies; strategy[p][v] is the chosen move of player p at
    // position v (only meaningful when v is owned by p, inside p's region,
    // and has at least one move).
    std::vector<int> strategy_exists;    // -1 where undefined
    std::vector<int> strategy_forall;    // -1 where undefined
};

Solution solve(const GameArena& arena);

// Model-check a positional strategy: every play conformant with `strategy`
// from a position won by `player` must satisfy `player`'s objective. Lasso
// analysis on the strategy-restricted graph.
bool verify_strategy(const GameArena& arena, Player player,
                     const std::vector<int>& strategy,
                     const std::vector<Player>& winner);

// Direct weak-parity solver by SCC topological sweep (used to cross-check the
// reduction to co-Buchi inside solve()).
Solution solve_weak_by_scc(const GameArena& arena);

// Tarjan SCC decomposition; returns component index per position, components
// numbered in reverse topological order (comp[v] < comp[w] when w -> v path
// only). Exposed for the semantics module's weak-condition assignment.
std::vector<int> scc_decomposition(int n, const std::vector<std::vector<int>>& moves,
                                   int* out_count);

}  // namespace afmc
