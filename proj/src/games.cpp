#include "games.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace afmc {

// ---------------------------------------------------------------------------
// Validation & SCCs
// ---------------------------------------------------------------------------

void GameArena::validate() const {
    if (int(moves.size()) != n || int(owner.size()) != n)
        throw std::invalid_argument("arena: size mismatch");
    if (initial < 0 || initial >= n) throw std::invalid_argument("arena: bad initial");
    for (int v = 0; v < n; ++v) {
        for (int w : moves[v])
            if (w < 0 || w >= n) throw std::invalid_argument("arena: bad edge");
        if (moves[v].size() != 1 && !owner[v])
            throw std::invalid_argument("arena: owner undefined at position " +
                                        std::to_string(v) + " with out-degree != 1");
    }
    if (kind == WinKind::WeakParity) {
        if (int(priority.size()) != n)
            throw std::invalid_argument("arena: missing priorities");
        int count = 0;
        auto comp = scc_decomposition(n, moves, &count);
        std::vector<int> pri_of(count, -1);
        for (int v = 0; v < n; ++v) {
            if (pri_of[comp[v]] == -1) pri_of[comp[v]] = priority[v];
            if (pri_of[comp[v]] != priority[v])
                throw std::invalid_argument(
                    "arena: weak condition requires priorities constant on SCCs");
        }
    } else if (int(mark.size()) != n) {
        throw std::invalid_argument("arena: missing mark set");
    }
}

std::vector<int> scc_decomposition(int n, const std::vector<std::vector<int>>& moves,
                                   int* out_count) {
    // Iterative Tarjan. Components are numbered in completion order, so for a
    // cross-component edge u -> v we have comp[v] < comp[u] (sinks first).
    std::vector<int> comp(n, -1), low(n), idx(n, -1), stk;
    std::vector<bool> on_stack(n, false);
    int next_index = 0, next_comp = 0;
    struct Frame { int v; size_t ei; };
    for (int root = 0; root < n; ++root) {
        if (idx[root] != -1) continue;
        std::vector<Frame> frames{{root, 0}};
        idx[root] = low[root] = next_index++;
        stk.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            auto& fr = frames.back();
            if (fr.ei < moves[fr.v].size()) {
                int w = moves[fr.v][fr.ei++];
                if (idx[w] == -1) {
                    idx[w] = low[w] = next_index++;
                    stk.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[fr.v] = std::min(low[fr.v], idx[w]);
                }
            } else {
                int v = fr.v;
                frames.pop_back();
                if (!frames.empty())
                    low[frames.back().v] = std::min(low[frames.back().v], low[v]);
                if (low[v] == idx[v]) {
                    while (true) {
                        int w = stk.back();
                        stk.pop_back();
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if (w == v) break;
                    }
                    ++next_comp;
                }
            }
        }
    }
    if (out_count) *out_count = next_comp;
    return comp;
}

// ---------------------------------------------------------------------------
// Attractors
// ---------------------------------------------------------------------------

namespace {

// Attractor of `target` for player P within `alive` (targets outside alive
// are ignored). Fills `strat` with attractor moves for P-owned positions.
// Stuck positions are not handled here; solve() routes dead ends to virtual
// sinks first so every alive position keeps at least one alive successor.
std::vector<bool> attractor(const GameArena& g, const std::vector<bool>& alive,
                            std::vector<bool> target, Player p,
                            std::vector<int>* strat) {
    int n = g.n;
    for (int v = 0; v < n; ++v)
        if (!alive[v]) target[v] = false;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int v = 0; v < n; ++v) {
            if (!alive[v] || target[v]) continue;
            bool mine = g.owner[v] && *g.owner[v] == p;
            int good = -1, alive_succs = 0, good_count = 0;
            for (int w : g.moves[v]) {
                if (!alive[w]) continue;
                ++alive_succs;
                if (target[w]) { ++good_count; if (good == -1) good = w; }
            }
            if (alive_succs == 0) continue;
            // Unowned positions have out-degree 1, so both readings coincide.
            bool attracted = mine ? good != -1 : good_count == alive_succs;
            if (attracted) {
                target[v] = true;
                if (strat && mine) (*strat)[v] = good;
                changed = true;
            }
        }
    }
    return target;
}

// Buchi game restricted to positions where every alive position has at least
// one alive successor: `bp` wins iff `mark` is visited infinitely often.
void solve_buchi(const GameArena& g, const std::vector<bool>& mark, Player bp,
                 std::vector<Player>& winner, std::vector<int>& strat_bp,
                 std::vector<int>& strat_op) {
    int n = g.n;
    Player op = opponent(bp);
    std::vector<bool> alive(n, true);
    while (true) {
        // R: positions from which bp can reach a live mark.
        std::vector<bool> live_mark(n, false);
        bool any = false;
        for (int v = 0; v < n; ++v)
            if (alive[v] && mark[v]) { live_mark[v] = true; any = true; }
        std::vector<int> reach_strat(n, -1);
        std::vector<bool> r =
            any ? attractor(g, alive, live_mark, bp, &reach_strat)
                : std::vector<bool>(n, false);
        // U: live positions from which op avoids mark forever.
        std::vector<bool> u(n, false);
        bool u_empty = true;
        for (int v = 0; v < n; ++v)
            if (alive[v] && !r[v]) { u[v] = true; u_empty = false; }
        if (u_empty) {
            // bp wins everything still alive.
            for (int v = 0; v < n; ++v) {
                if (!alive[v]) continue;
                winner[v] = bp;
                if (g.owner[v] && *g.owner[v] == bp) {
                    if (!mark[v] && reach_strat[v] != -1) {
                        strat_bp[v] = reach_strat[v];
                    } else {
                        // at a mark position (or rank-0 target) pick any
                        // successor that stays alive
                        for (int w : g.moves[v])
                            if (alive[w]) { strat_bp[v] = w; break; }
                    }
                }
            }
            return;
        }
        // op attracts to U; that whole region is winning for op.
        std::vector<int> attr_strat(n, -1);
        std::vector<bool> a = attractor(g, alive, u, op, &attr_strat);
        for (int v = 0; v < n; ++v) {
            if (!alive[v] || !a[v]) continue;
            winner[v] = op;
            if (g.owner[v] && *g.owner[v] == op) {
                if (u[v]) {
                    // stay outside R: some alive successor not in r
                    for (int w : g.moves[v])
                        if (alive[w] && !r[w]) { strat_op[v] = w; break; }
                } else {
                    strat_op[v] = attr_strat[v];
                }
            }
        }
        for (int v = 0; v < n; ++v)
            if (a[v]) alive[v] = false;
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// solve()
// ---------------------------------------------------------------------------

Solution solve(const GameArena& arena) {
    arena.validate();
    // Sink transformation: make every position have a successor by routing
    // dead ends to a paradise of the non-stuck player.
    GameArena g = arena;
    int we = g.n, wf = g.n + 1;  // Exists paradise, Forall paradise
    g.n += 2;
    g.moves.push_back({we});
    g.moves.push_back({wf});
    g.owner.push_back(std::nullopt);
    g.owner.push_back(std::nullopt);
    for (int v = 0; v < arena.n; ++v)
        if (g.moves[v].empty())
            g.moves[v].push_back(*g.owner[v] == Player::Exists ? wf : we);

    // Reduce every condition to a Buchi question.
    std::vector<bool> mark(g.n, false);
    Player bp = Player::Exists;  // whose objective is "visit mark infinitely often"
    switch (arena.kind) {
        case WinKind::Reachability: {
            // Exists wins iff mark visited (once). Equivalent Buchi question:
            // make mark absorbing-good by attractor solving directly.
            std::vector<bool> alive(g.n, true), target(g.n, false);
            for (int v = 0; v < arena.n; ++v) target[v] = arena.mark[v];
            target[we] = true;
            Solution s;
            s.winner.assign(arena.n, Player::Forall);
            s.strategy_exists.assign(arena.n, -1);
            s.strategy_forall.assign(arena.n, -1);
            std::vector<int> strat(g.n, -1);
            auto r = attractor(g, alive, target, Player::Exists, &strat);
            for (int v = 0; v < arena.n; ++v) {
                s.winner[v] = r[v] ? Player::Exists : Player::Forall;
                if (g.owner[v] && !arena.moves[v].empty()) {
                    if (r[v] && *g.owner[v] == Player::Exists && !arena.mark[v] &&
                        strat[v] != -1 && strat[v] < arena.n)
                        s.strategy_exists[v] = strat[v];
                    if (!r[v] && *g.owner[v] == Player::Forall)
                        for (int w : arena.moves[v])
                            if (!r[w]) { s.strategy_forall[v] = w; break; }
                }
            }
            // Arbitrary legal moves where none was forced by the analysis.
            for (int v = 0; v < arena.n; ++v) {
                if (!arena.moves[v].empty() && g.owner[v]) {
                    auto& st = *g.owner[v] == Player::Exists ? s.strategy_exists
                                                             : s.strategy_forall;
                    if (st[v] == -1 && s.winner[v] == *g.owner[v]) st[v] = arena.moves[v][0];
                }
            }
            return s;
        }
        case WinKind::Buchi:
            bp = Player::Exists;
            for (int v = 0; v < arena.n; ++v) mark[v] = arena.mark[v];
            mark[we] = true;
            break;
        case WinKind::CoBuchi:
            // Exists wins iff mark finitely often <=> Forall's Buchi objective
            // is mark infinitely often.
            bp = Player::Forall;
            for (int v = 0; v < arena.n; ++v) mark[v] = arena.mark[v];
            mark[wf] = true;
            break;
        case WinKind::WeakParity:
            // Priorities constant on SCCs: the infinitely-visited set lies in
            // one SCC, so "max infinite priority even" <=> finitely many
            // visits to odd positions <=> co-Buchi(odd).
            bp = Player::Forall;
            for (int v = 0; v < arena.n; ++v) mark[v] = arena.priority[v] % 2 != 0;
            mark[wf] = true;
            break;
    }

    std::vector<Player> winner(g.n, Player::Exists);
    std::vector<int> strat_e(g.n, -1), strat_f(g.n, -1);
    if (bp == Player::Exists)
        solve_buchi(g, mark, bp, winner, strat_e, strat_f);
    else
        solve_buchi(g, mark, bp, winner, strat_f, strat_e);

    Solution s;
    s.winner.assign(winner.begin(), winner.begin() + arena.n);
    s.strategy_exists.assign(strat_e.begin(), strat_e.begin() + arena.n);
    s.strategy_forall.assign(strat_f.begin(), strat_f.begin() + arena.n);
    // Clip strategies pointing at virtual sinks (dead-end positions).
    for (int v = 0; v < arena.n; ++v) {
        if (s.strategy_exists[v] >= arena.n) s.strategy_exists[v] = -1;
        if (s.strategy_forall[v] >= arena.n) s.strategy_forall[v] = -1;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Weak games by SCC sweep
// ---------------------------------------------------------------------------

Solution solve_weak_by_scc(const GameArena& arena) {
    arena.validate();
    if (arena.kind != WinKind::WeakParity)
        throw std::invalid_argument("solve_weak_by_scc: not a weak-parity arena");
    int n = arena.n, count = 0;
    auto comp = scc_decomposition(n, arena.moves, &count);
    std::vector<std::vector<int>> members(count);
    for (int v = 0; v < n; ++v) members[comp[v]].push_back(v);

    Solution s;
    s.winner.assign(n, Player::Forall);
    s.strategy_exists.assign(n, -1);
    s.strategy_forall.assign(n, -1);
    std::vector<bool> decided(n, false);

    // comp ids: edges leave a component toward smaller ids, so process 0..count-1.
    for (int c = 0; c < count; ++c) {
        int pri = arena.priority[members[c][0]];
        Player p = (pri % 2 == 0) ? Player::Exists : Player::Forall;
        Player op = opponent(p);
        // Opp-attractor within the component to decided opp-won positions;
        // p is "stuck" when all successors are bad, including none at all.
        std::vector<bool> bad(n, false);
        bool changed = true;
        auto is_bad_succ = [&](int w) {
            return (decided[w] && s.winner[w] == op) || bad[w];
        };
        while (changed) {
            changed = false;
            for (int v : members[c]) {
                if (bad[v]) continue;
                bool opp_owned = arena.owner[v] && *arena.owner[v] == op;
                int bad_move = -1, total = 0, bad_count = 0;
                for (int w : arena.moves[v]) {
                    ++total;
                    if (is_bad_succ(w)) { ++bad_count; if (bad_move == -1) bad_move = w; }
                }
                // p-owned (or forced) positions are attracted when every move
                // is bad — including when there is no move at all (p stuck).
                bool attracted = opp_owned ? bad_move != -1 : bad_count == total;
                if (attracted) {
                    bad[v] = true;
                    changed = true;
                    // Record the rank-decreasing move now; an arbitrary bad
                    // successor chosen later could cycle inside the component.
                    if (opp_owned) {
                        auto& strat_o = (op == Player::Exists) ? s.strategy_exists
                                                               : s.strategy_forall;
                        strat_o[v] = bad_move;
                    }
                }
            }
        }
        for (int v : members[c]) {
            decided[v] = true;
            s.winner[v] = bad[v] ? op : p;
            auto& strat_p = (p == Player::Exists) ? s.strategy_exists : s.strategy_forall;
            if (!bad[v] && arena.owner[v] && *arena.owner[v] == p) {
                for (int w : arena.moves[v]) {
                    bool safe_here = comp[w] == c && !bad[w];
                    bool won_out = decided[w] && comp[w] != c && s.winner[w] == p;
                    if (safe_here || won_out) { strat_p[v] = w; break; }
                }
            }
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Strategy verification
// ---------------------------------------------------------------------------

bool verify_strategy(const GameArena& arena, Player player,
                     const std::vector<int>& strategy,
                     const std::vector<Player>& winner) {
    arena.validate();
    int n = arena.n;
    // For Exists under reachability a play is over once it hits a mark, so
    // mark positions are terminal and exempt from trap/stuck checks.
    bool reach_exists = arena.kind == WinKind::Reachability && player == Player::Exists;
    auto terminal = [&](int v) { return reach_exists && arena.mark[v]; };
    // Conformant subgraph.
    std::vector<std::vector<int>> sub(n);
    for (int v = 0; v < n; ++v) {
        if (winner[v] != player || terminal(v)) continue;
        if (arena.owner[v] && *arena.owner[v] == player && !arena.moves[v].empty()) {
            int m = strategy[v];
            if (m < 0 || m >= n) return false;  // must be total on the region
            if (std::find(arena.moves[v].begin(), arena.moves[v].end(), m) ==
                arena.moves[v].end())
                return false;  // illegal move
            if (winner[m] != player) return false;  // leaves the region
            sub[v].push_back(m);
        } else {
            for (int w : arena.moves[v]) {
                if (winner[w] != player) return false;  // region not a trap
                sub[v].push_back(w);
            }
        }
    }
    // Per winning position: check all conformant plays.
    // Reachable set within the region.
    for (int v0 = 0; v0 < n; ++v0) {
        if (winner[v0] != player) continue;
        std::vector<bool> reach(n, false);
        std::vector<int> stack{v0};
        reach[v0] = true;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w : sub[v])
                if (!reach[w]) { reach[w] = true; stack.push_back(w); }
        }
        // Stuck checks: a reachable dead end must belong to the opponent.
        for (int v = 0; v < n; ++v) {
            if (!reach[v] || !sub[v].empty() || terminal(v)) continue;
            if (arena.moves[v].empty()) {
                if (*arena.owner[v] == player) return false;  // player stuck
            }
        }
        // Cycle analysis on the reachable conformant subgraph.
        std::vector<std::vector<int>> rsub(n);
        for (int v = 0; v < n; ++v)
            if (reach[v])
                for (int w : sub[v]) rsub[v].push_back(w);
        int count = 0;
        auto comp = scc_decomposition(n, rsub, &count);
        std::vector<bool> cyclic(count, false);
        std::vector<int> csize(count, 0);
        for (int v = 0; v < n; ++v)
            if (reach[v]) ++csize[comp[v]];
        for (int v = 0; v < n; ++v) {
            if (!reach[v]) continue;
            for (int w : rsub[v])
                if (comp[w] == comp[v] && (w == v || csize[comp[v]] > 1))
                    cyclic[comp[v]] = true;
        }
        auto exists_obj = player == Player::Exists;
        switch (arena.kind) {
            case WinKind::Reachability: {
                if (exists_obj) {
                    // sub[] stops at marks, so every conformant play must end
                    // at a mark or at an opponent dead end; any reachable
                    // cycle would admit a play avoiding mark forever.
                    for (int v = 0; v < n; ++v)
                        if (reach[v] && cyclic[comp[v]]) return false;
                } else {
                    // no conformant play may reach mark
                    for (int v = 0; v < n; ++v)
                        if (reach[v] && arena.mark[v]) return false;
                }
                break;
            }
            case WinKind::Buchi:
            case WinKind::CoBuchi: {
                bool want_inf = (arena.kind == WinKind::Buchi) == exists_obj;
                if (want_inf) {
                    // every reachable cycle must contain a mark: the subgraph
                    // restricted to non-mark reachable nodes must be acyclic.
                    std::vector<std::vector<int>> g2(n);
                    for (int v = 0; v < n; ++v)
                        if (reach[v] && !arena.mark[v])
                            for (int w : sub[v])
                                if (reach[w] && !arena.mark[w]) g2[v].push_back(w);
                    int c2 = 0;
                    auto cm = scc_decomposition(n, g2, &c2);
                    std::vector<int> sz(c2, 0);
                    for (int v = 0; v < n; ++v)
                        if (reach[v] && !arena.mark[v]) ++sz[cm[v]];
                    for (int v = 0; v < n; ++v) {
                        if (!reach[v] || arena.mark[v]) continue;
                        for (int w : g2[v])
                            if (cm[w] == cm[v] && (w == v || sz[cm[v]] > 1)) return false;
                    }
                } else {
                    // no reachable cycle may contain a mark
                    for (int v = 0; v < n; ++v) {
                        if (!reach[v] || !arena.mark[v]) continue;
                        if (cyclic[comp[v]]) return false;
                    }
                }
                break;
            }
            case WinKind::WeakParity: {
                for (int v = 0; v < n; ++v) {
                    if (!reach[v] || !cyclic[comp[v]]) continue;
                    bool even = arena.priority[v] % 2 == 0;
                    if (even != exists_obj) return false;
                }
                break;
            }
        }
    }
    return true;
}

}  // namespace afmc
