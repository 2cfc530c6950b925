// Independent ground truth for small games: exhaustive enumeration of joint
// positional strategy profiles, plus a generator of small random arenas.
#pragma once

#include <algorithm>
#include <random>

#include "../src/games.hpp"

namespace afmc::gen {

// Independent oracle: enumerate joint positional strategy profiles (each
// position is controlled by exactly one party, so a profile is one choice per
// non-dead-end position) and evaluate the resulting deterministic lasso play.
// Exists wins v iff some choice of her components beats all choices of
// Forall's components. Sound for these conditions by positional determinacy.
struct Oracle {
    const GameArena& g;
    std::vector<int> e_pos, f_pos;  // owned positions with a real choice

    explicit Oracle(const GameArena& g_) : g(g_) {
        for (int v = 0; v < g.n; ++v) {
            if (g.moves[v].size() < 2 || !g.owner[v]) continue;
            (*g.owner[v] == Player::Exists ? e_pos : f_pos).push_back(v);
        }
    }

    static bool next(std::vector<int>& choice, const std::vector<int>& pos,
                     const GameArena& g) {
        for (size_t i = 0; i < pos.size(); ++i) {
            if (++choice[i] < int(g.moves[pos[i]].size())) return true;
            choice[i] = 0;
        }
        return false;
    }

    bool play_good(int start, const std::vector<int>& ce,
                   const std::vector<int>& cf) const {
        auto pick = [&](int v) -> int {
            if (g.moves[v].empty()) return -1;
            if (g.moves[v].size() == 1) return g.moves[v][0];
            for (size_t i = 0; i < e_pos.size(); ++i)
                if (e_pos[i] == v) return g.moves[v][ce[i]];
            for (size_t i = 0; i < f_pos.size(); ++i)
                if (f_pos[i] == v) return g.moves[v][cf[i]];
            return g.moves[v][0];
        };
        std::vector<int> seen_at(g.n, -1);
        std::vector<int> path;
        int v = start;
        while (true) {
            if (seen_at[v] != -1) break;
            seen_at[v] = int(path.size());
            path.push_back(v);
            // Reachability is decided the moment a target is visited, before
            // any later stuck position can matter.
            if (g.kind == WinKind::Reachability && g.mark[v]) return true;
            int w = pick(v);
            if (w == -1) return *g.owner[v] == Player::Forall;  // mover stuck
            v = w;
        }
        int loop_from = seen_at[v];
        bool mark_prefix = false, mark_loop = false;
        int max_pri_loop = -1;
        for (int i = 0; i < int(path.size()); ++i) {
            bool in_loop = i >= loop_from;
            if (g.kind == WinKind::WeakParity) {
                if (in_loop) max_pri_loop = std::max(max_pri_loop, g.priority[path[i]]);
            } else if (g.mark[path[i]]) {
                (in_loop ? mark_loop : mark_prefix) = true;
            }
        }
        switch (g.kind) {
            case WinKind::Reachability: return mark_prefix || mark_loop;
            case WinKind::Buchi: return mark_loop;
            case WinKind::CoBuchi: return !mark_loop;
            case WinKind::WeakParity: return max_pri_loop % 2 == 0;
        }
        return false;
    }

    std::vector<Player> winners() const {
        std::vector<Player> w(g.n, Player::Forall);
        std::vector<int> ce(e_pos.size(), 0);
        std::vector<bool> won(g.n, false);
        do {
            std::vector<bool> all_good(g.n, true);
            std::vector<int> cf(f_pos.size(), 0);
            do {
                for (int v = 0; v < g.n; ++v)
                    if (all_good[v] && !play_good(v, ce, cf)) all_good[v] = false;
            } while (next(cf, f_pos, g));
            for (int v = 0; v < g.n; ++v)
                if (all_good[v]) won[v] = true;
        } while (next(ce, e_pos, g));
        for (int v = 0; v < g.n; ++v) w[v] = won[v] ? Player::Exists : Player::Forall;
        return w;
    }
};

inline GameArena random_arena(std::mt19937& rng, WinKind kind) {
    std::uniform_int_distribution<int> nd(1, 7);
    int n = nd(rng);
    GameArena g;
    g.n = n;
    g.initial = 0;
    g.kind = kind;
    g.moves.resize(n);
    g.owner.resize(n);
    for (int v = 0; v < n; ++v) {
        int deg = std::uniform_int_distribution<int>(0, 3)(rng);
        for (int i = 0; i < deg; ++i)
            g.moves[v].push_back(std::uniform_int_distribution<int>(0, n - 1)(rng));
        std::sort(g.moves[v].begin(), g.moves[v].end());
        g.moves[v].erase(std::unique(g.moves[v].begin(), g.moves[v].end()),
                         g.moves[v].end());
        g.owner[v] = std::uniform_int_distribution<int>(0, 1)(rng) == 0
                         ? Player::Exists
                         : Player::Forall;
    }
    if (kind == WinKind::WeakParity) {
        int count = 0;
        auto comp = scc_decomposition(n, g.moves, &count);
        std::vector<int> pri(count);
        for (int& p : pri) p = std::uniform_int_distribution<int>(0, 3)(rng);
        g.priority.resize(n);
        for (int v = 0; v < n; ++v) g.priority[v] = pri[comp[v]];
    } else {
        g.mark.resize(n);
        for (int v = 0; v < n; ++v)
            g.mark[v] = std::uniform_int_distribution<int>(0, 2)(rng) == 0;
    }
    return g;
}

}  // namespace afmc::gen
