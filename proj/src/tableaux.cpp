#include "tableaux.hpp"

#include <algorithm>
#include <stdexcept>

namespace afmc {

const char* trule_name(TRule r) {
    switch (r) {
        case TRule::Ax1: return "Ax1";
        case TRule::Ax2: return "Ax2";
        case TRule::ROr: return "ROr";
        case TRule::RAnd: return "RAnd";
        case TRule::M: return "M";
        case TRule::RMu: return "RMu";
        case TRule::RNu: return "RNu";
    }
    return "?";
}

namespace {

bool is_modal_context_formula(Formula f) {
    // allowed alongside boxes/diamonds in a modal-rule conclusion
    return is_literal(f) || f->kind == FKind::Bottom;
}

// Chooses the rule for a sequent under the schedule. Returns the principal
// for decomposition rules.
TRule choose_rule(const Sequent& s, Schedule sched, Formula* principal) {
    *principal = nullptr;
    for (Formula f : s)
        if (f->kind == FKind::Top) return TRule::Ax2;
    for (Formula f : s)
        if (f->kind == FKind::Prop && s.count(neg_prop(f->name)))
            return TRule::Ax1;
    std::vector<Formula> cand;
    for (Formula f : s) {
        FKind k = f->kind;
        if (k == FKind::Or || k == FKind::And || k == FKind::Mu || k == FKind::Nu)
            cand.push_back(f);
    }
    if (!cand.empty()) {
        // cand is in ascending formula order (the sequent is a sorted set)
        Formula p = sched == Schedule::LeastFirst ? cand.front() : cand.back();
        *principal = p;
        switch (p->kind) {
            case FKind::Or: return TRule::ROr;
            case FKind::And: return TRule::RAnd;
            case FKind::Mu: return TRule::RMu;
            default: return TRule::RNu;
        }
    }
    return TRule::M;
}

std::vector<Sequent> premises(const Sequent& s, TRule r, Formula principal) {
    Sequent ctx = s;
    if (principal) ctx.erase(principal);
    switch (r) {
        case TRule::Ax1:
        case TRule::Ax2:
            return {};
        case TRule::ROr: {
            Sequent p = ctx;
            p.insert(principal->lhs);
            p.insert(principal->rhs);
            return {p};
        }
        case TRule::RAnd: {
            Sequent l = ctx, rr = ctx;
            l.insert(principal->lhs);
            rr.insert(principal->rhs);
            return {l, rr};
        }
        case TRule::RMu:
        case TRule::RNu: {
            Sequent p = ctx;
            p.insert(unfold(principal));
            return {p};
        }
        case TRule::M: {
            Sequent stripped_dia;
            std::vector<Formula> boxes;
            for (Formula f : s) {
                if (f->kind == FKind::Box) boxes.push_back(f);
                else if (f->kind == FKind::Dia) stripped_dia.insert(f->lhs);
                else if (!is_modal_context_formula(f))
                    throw std::logic_error("modal rule on a non-saturated sequent");
            }
            std::vector<Sequent> out;
            for (Formula b : boxes) {
                Sequent p = stripped_dia;
                p.insert(b->lhs);
                out.push_back(p);
            }
            return out;
        }
    }
    return {};
}

}  // namespace

Tableau build_tableau(const Sequent& phi, Schedule sched) {
    if (phi.empty())
        throw std::invalid_argument("tableau: the root sequent must be non-empty");
    for (Formula f : phi) {
        if (!is_guarded(f))
            throw std::invalid_argument("tableau: unguarded formula " + to_string(f));
        if (!is_alternation_free(f))
            throw std::invalid_argument("tableau: formula is not alternation-free: " +
                                        to_string(f));
    }
    Tableau t;
    std::map<Sequent, int> seen;
    std::vector<int> work;
    auto intern = [&](const Sequent& s) {
        auto it = seen.find(s);
        if (it != seen.end()) return it->second;
        Formula principal = nullptr;
        TRule r = choose_rule(s, sched, &principal);
        int id = int(t.nodes.size());
        t.nodes.push_back({s, r, principal, {}});
        seen.emplace(s, id);
        work.push_back(id);
        return id;
    };
    t.initial = intern(phi);
    while (!work.empty()) {
        int v = work.back();
        work.pop_back();
        TableauNode n = t.nodes[v];  // copy: intern() may reallocate
        std::vector<int> succs;
        for (const Sequent& p : premises(n.seq, n.rule, n.principal)) {
            int u = intern(p);
            if (std::find(succs.begin(), succs.end(), u) == succs.end())
                succs.push_back(u);
        }
        t.nodes[v].succs = std::move(succs);
    }
    return t;
}

nlohmann::json tableau_to_json(const Tableau& t) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes) {
        nlohmann::json seq = nlohmann::json::array();
        for (Formula f : n.seq) seq.push_back(to_string(f));
        nlohmann::json jn{{"seq", std::move(seq)},
                          {"rule", trule_name(n.rule)},
                          {"succs", n.succs}};
        jn["principal"] =
            n.principal ? nlohmann::json(to_string(n.principal)) : nullptr;
        nodes.push_back(std::move(jn));
    }
    return nlohmann::json{{"nodes", std::move(nodes)}, {"initial", t.initial}};
}

// ---------------------------------------------------------------------------
// Trails
// ---------------------------------------------------------------------------

TabTrail tableau_trail_step(const Tableau& t, int u, int v) {
    const TableauNode& n = t.nodes[u];
    if (std::find(n.succs.begin(), n.succs.end(), v) == n.succs.end())
        throw std::invalid_argument("trail step: not an edge");
    const Sequent& prem = t.nodes[v].seq;
    TabTrail out;
    Sequent ctx = n.seq;
    if (n.principal) ctx.erase(n.principal);
    switch (n.rule) {
        case TRule::ROr:
            out.active.push_back({n.principal, n.principal->lhs});
            out.active.push_back({n.principal, n.principal->rhs});
            break;
        case TRule::RAnd:
            // with shared premise nodes either conjunct may be the residual
            for (Formula chi : {n.principal->lhs, n.principal->rhs}) {
                Sequent p = ctx;
                p.insert(chi);
                if (p == prem) {
                    out.active.push_back({n.principal, chi});
                    if (n.principal->lhs == n.principal->rhs) break;
                }
            }
            break;
        case TRule::RMu:
        case TRule::RNu:
            out.active.push_back({n.principal, unfold(n.principal)});
            break;
        case TRule::M: {
            Sequent stripped_dia;
            for (Formula f : n.seq)
                if (f->kind == FKind::Dia) stripped_dia.insert(f->lhs);
            for (Formula f : n.seq) {
                if (f->kind != FKind::Box) continue;
                Sequent p = stripped_dia;
                p.insert(f->lhs);
                if (p == prem) out.active.push_back({f, f->lhs});
            }
            for (Formula f : n.seq)
                if (f->kind == FKind::Dia) out.active.push_back({f, f->lhs});
            return out;  // passive relation is empty
        }
        case TRule::Ax1:
        case TRule::Ax2:
            return out;
    }
    for (Formula f : ctx)
        if (prem.count(f)) out.passive.push_back({f, f});
    return out;
}

namespace {

// active / passive / absent classification of one trail step
enum class StepKind { Active, Passive, None };

StepKind step_kind(const TabTrail& rel, Formula from, Formula to) {
    for (const auto& [a, b] : rel.active)
        if (a == from && b == to) return StepKind::Active;
    for (const auto& [a, b] : rel.passive)
        if (a == from && b == to) return StepKind::Passive;
    return StepKind::None;
}

}  // namespace

TightTrail tighten(const Tableau& t, const std::vector<int>& path,
                   const std::vector<Formula>& trail) {
    if (path.size() != trail.size())
        throw std::invalid_argument("tighten: path/trail length mismatch");
    TightTrail out;
    if (trail.empty()) return out;
    out.steps.push_back(trail[0]);
    for (size_t i = 0; i + 1 < trail.size(); ++i) {
        TabTrail rel = tableau_trail_step(t, path[i], path[i + 1]);
        switch (step_kind(rel, trail[i], trail[i + 1])) {
            case StepKind::Active:
                out.steps.push_back(trail[i + 1]);
                break;
            case StepKind::Passive:
                break;
            case StepKind::None:
                throw std::invalid_argument("tighten: not a trail at step " +
                                            std::to_string(i));
        }
    }
    return out;
}

bool is_nu_trail(const Tableau& t, const std::vector<int>& path, int loop_start,
                 const std::vector<Formula>& trail) {
    if (path.size() != trail.size() || path.empty() || loop_start < 0 ||
        loop_start >= int(path.size()))
        throw std::invalid_argument("is_nu_trail: malformed lasso");
    TraceLasso lasso;
    lasso.prefix.push_back(trail[0]);
    int n = int(path.size());
    for (int i = 0; i < n; ++i) {
        int j = i + 1 < n ? i + 1 : loop_start;  // wrap edge
        Formula to = i + 1 < n ? trail[i + 1] : trail[loop_start];
        TabTrail rel = tableau_trail_step(t, path[i], path[j]);
        StepKind k = step_kind(rel, trail[i], to);
        if (k == StepKind::None)
            throw std::invalid_argument("is_nu_trail: not a trail at step " +
                                        std::to_string(i));
        if (k != StepKind::Active) continue;
        (i + 1 <= loop_start && i + 1 < n ? lasso.prefix : lasso.loop)
            .push_back(to);
    }
    if (lasso.loop.empty())
        throw std::invalid_argument(
            "is_nu_trail: the tightened loop is empty (trail not infinite)");
    return classify_trace(lasso) == Eta::Nu;
}

// ---------------------------------------------------------------------------
// The tableau game
// ---------------------------------------------------------------------------

int TableauGame::find(int node, const Sequent& focus, bool reset) const {
    std::vector<Formula> key(focus.begin(), focus.end());
    auto it = index.find({node, key, reset});
    return it == index.end() ? -1 : it->second;
}

TableauGame tableau_game(const Tableau& t) {
    TableauGame g;
    std::vector<int> work;
    auto intern = [&](int node, const Sequent& focus, bool reset) {
        std::vector<Formula> key(focus.begin(), focus.end());
        auto it = g.index.find({node, key, reset});
        if (it != g.index.end()) return it->second;
        int id = int(g.pos_node.size());
        g.index.emplace(std::make_tuple(node, key, reset), id);
        g.pos_node.push_back(node);
        g.pos_focus.push_back(focus);
        g.pos_reset.push_back(reset);
        work.push_back(id);
        return id;
    };
    int root = intern(t.initial, t.nodes[t.initial].seq, false);
    std::vector<std::vector<int>> moves;
    while (!work.empty()) {
        int v = work.back();
        work.pop_back();
        if (int(moves.size()) <= v) moves.resize(v + 1);
        int node = g.pos_node[v];
        Sequent focus = g.pos_focus[v];
        for (int u : t.nodes[node].succs) {
            TabTrail rel = tableau_trail_step(t, node, u);
            Sequent next;
            for (const auto& [a, b] : rel.passive)
                if (focus.count(a)) next.insert(b);
            for (const auto& [a, b] : rel.active) {
                // a μ-unfolding drops its formula from the tracker
                if (t.nodes[node].rule == TRule::RMu) continue;
                if (focus.count(a)) next.insert(b);
            }
            bool reset = next.empty();
            if (reset) next = t.nodes[u].seq;
            moves[v].push_back(intern(u, next, reset));
        }
    }
    int n = int(g.pos_node.size());
    moves.resize(n);
    g.arena.n = n;
    g.arena.moves = std::move(moves);
    g.arena.owner.assign(n, std::nullopt);
    for (int v = 0; v < n; ++v) {
        if (g.arena.moves[v].size() == 1) continue;  // forced move: no owner
        switch (t.nodes[g.pos_node[v]].rule) {
            case TRule::Ax1:
            case TRule::Ax2:
            case TRule::RAnd:
                g.arena.owner[v] = Player::Forall;  // Refuter
                break;
            case TRule::M:
                g.arena.owner[v] = Player::Exists;  // Prover
                break;
            default:
                // R∨/Rμ/Rν have one successor; duplicated conjunct premises
                // also collapse to a forced move
                throw std::logic_error("tableau game: unexpected branching");
        }
    }
    g.arena.initial = root;
    g.arena.kind = WinKind::CoBuchi;  // Prover wins iff finitely many resets
    g.arena.mark.assign(n, false);
    for (int v = 0; v < n; ++v) g.arena.mark[v] = g.pos_reset[v];
    g.arena.validate();
    return g;
}

TableauSolution solve_tableau(const Tableau& t) {
    TableauSolution s{tableau_game(t), {}, Player::Forall};
    s.sol = solve(s.game.arena);
    s.winner = s.sol.winner[s.game.arena.initial];
    return s;
}

// ---------------------------------------------------------------------------
// Countermodels
// ---------------------------------------------------------------------------

Countermodel extract_countermodel(const Tableau& t, const TableauGame& g,
                                  const Solution& sol) {
    const GameArena& a = g.arena;
    if (sol.winner[a.initial] != Player::Forall)
        throw std::invalid_argument("countermodel: Refuter does not win the root");
    if (!verify_strategy(a, Player::Forall, sol.strategy_forall, sol.winner))
        throw std::invalid_argument("countermodel: strategy fails verification");

    // Walks the in-state path from an entry position to its modal node.
    auto last_of = [&](int entry) {
        int v = entry;
        for (int steps = 0; steps <= a.n; ++steps) {
            TRule r = t.nodes[g.pos_node[v]].rule;
            if (r == TRule::M) return v;
            if (r == TRule::Ax1 || r == TRule::Ax2)
                throw std::logic_error("countermodel: reached an axiom");
            int next = a.moves[v].size() == 1 ? a.moves[v][0]
                                              : sol.strategy_forall[v];
            if (next < 0 || sol.winner[next] != Player::Forall)
                throw std::logic_error("countermodel: strategy leaves the region");
            v = next;
        }
        throw std::logic_error("countermodel: modal-free cycle (unguarded?)");
    };

    std::map<int, int> state_id;  // entry position -> world index
    std::vector<int> entries, lasts;
    std::vector<int> work;
    auto intern = [&](int entry) {
        auto it = state_id.find(entry);
        if (it != state_id.end()) return it->second;
        int id = int(entries.size());
        state_id.emplace(entry, id);
        entries.push_back(entry);
        lasts.push_back(last_of(entry));
        work.push_back(id);
        return id;
    };

    KripkeModel m;
    intern(a.initial);
    while (!work.empty()) {
        int s = work.back();
        work.pop_back();
        m.rel.resize(entries.size());
        for (int u : a.moves[lasts[s]]) intern(u);
    }
    m.rel.resize(entries.size());
    for (size_t s = 0; s < entries.size(); ++s)
        for (int u : a.moves[lasts[s]]) m.rel[s].push_back(state_id.at(u));
    for (size_t s = 0; s < entries.size(); ++s)
        m.worlds.push_back("s" + std::to_string(s));

    std::set<std::string> letters;
    for (const auto& node : t.nodes)
        for (Formula f : node.seq)
            for (const auto& p : free_vars(f)) letters.insert(p);
    // The valuation makes p false wherever the state's final sequent keeps p
    // alive (the sequent is read disjunctively and must be refuted).
    for (const auto& p : letters) {
        WorldSet ws(entries.size(), false);
        for (size_t s = 0; s < entries.size(); ++s)
            ws[s] = !t.nodes[g.pos_node[lasts[s]]].seq.count(prop(p));
        m.val[p] = ws;
    }
    m.validate();
    return {m, "s0"};
}

}  // namespace afmc
