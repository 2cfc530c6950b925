#include "semantics.hpp"

#include <algorithm>
#include <stdexcept>

namespace afmc {

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

int KripkeModel::world_index(const std::string& name) const {
    for (size_t i = 0; i < worlds.size(); ++i)
        if (worlds[i] == name) return int(i);
    return -1;
}

void KripkeModel::validate() const {
    for (size_t i = 0; i < worlds.size(); ++i)
        for (size_t j = i + 1; j < worlds.size(); ++j)
            if (worlds[i] == worlds[j])
                throw std::invalid_argument("model: duplicate world " + worlds[i]);
    if (rel.size() != worlds.size())
        throw std::invalid_argument("model: relation size mismatch");
    for (const auto& succs : rel)
        for (int t : succs)
            if (t < 0 || t >= int(worlds.size()))
                throw std::invalid_argument("model: relation endpoint out of range");
    for (const auto& [p, set] : val)
        if (set.size() != worlds.size())
            throw std::invalid_argument("model: valuation size mismatch for " + p);
}

KripkeModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("model: expected an object");
    KripkeModel m;
    for (const auto& w : j.at("worlds")) m.worlds.push_back(w.get<std::string>());
    m.rel.assign(m.worlds.size(), {});
    auto idx = [&](const nlohmann::json& name) {
        int i = m.world_index(name.get<std::string>());
        if (i < 0)
            throw std::invalid_argument("model: unknown world " +
                                        name.get<std::string>());
        return i;
    };
    if (j.contains("rel"))
        for (const auto& edge : j.at("rel")) {
            if (!edge.is_array() || edge.size() != 2)
                throw std::invalid_argument("model: relation entries are pairs");
            m.rel[idx(edge[0])].push_back(idx(edge[1]));
        }
    for (auto& succs : m.rel) {
        std::sort(succs.begin(), succs.end());
        succs.erase(std::unique(succs.begin(), succs.end()), succs.end());
    }
    if (j.contains("val"))
        for (const auto& [p, set] : j.at("val").items()) {
            WorldSet ws(m.worlds.size(), false);
            for (const auto& w : set) ws[idx(w)] = true;
            m.val[p] = std::move(ws);
        }
    m.validate();
    return m;
}

nlohmann::json model_to_json(const KripkeModel& m) {
    nlohmann::json j;
    j["worlds"] = m.worlds;
    auto rel = nlohmann::json::array();
    for (size_t s = 0; s < m.rel.size(); ++s)
        for (int t : m.rel[s]) rel.push_back({m.worlds[s], m.worlds[t]});
    j["rel"] = std::move(rel);
    auto val = nlohmann::json::object();
    for (const auto& [p, set] : m.val) {
        auto arr = nlohmann::json::array();
        for (size_t s = 0; s < set.size(); ++s)
            if (set[s]) arr.push_back(m.worlds[s]);
        val[p] = std::move(arr);
    }
    j["val"] = std::move(val);
    return j;
}

// ---------------------------------------------------------------------------
// Denotational semantics
// ---------------------------------------------------------------------------

namespace {

WorldSet pre_exists(const KripkeModel& m, const WorldSet& u) {
    WorldSet r(m.worlds.size(), false);
    for (size_t s = 0; s < m.worlds.size(); ++s)
        for (int t : m.rel[s])
            if (u[t]) { r[s] = true; break; }
    return r;
}

WorldSet pre_forall(const KripkeModel& m, const WorldSet& u) {
    WorldSet r(m.worlds.size(), true);
    for (size_t s = 0; s < m.worlds.size(); ++s)
        for (int t : m.rel[s])
            if (!u[t]) { r[s] = false; break; }
    return r;
}

WorldSet denote_env(Formula f, const KripkeModel& m,
                    std::map<std::string, WorldSet>& env) {
    size_t n = m.worlds.size();
    auto letter = [&](const std::string& p) -> WorldSet {
        if (auto it = env.find(p); it != env.end()) return it->second;
        if (auto it = m.val.find(p); it != m.val.end()) return it->second;
        return WorldSet(n, false);  // unvaluated letters are false everywhere
    };
    switch (f->kind) {
        case FKind::Top: return WorldSet(n, true);
        case FKind::Bottom: return WorldSet(n, false);
        case FKind::Prop: return letter(f->name);
        case FKind::NegProp: {
            WorldSet u = letter(f->name);
            u.flip();
            return u;
        }
        case FKind::Or: {
            WorldSet a = denote_env(f->lhs, m, env), b = denote_env(f->rhs, m, env);
            for (size_t i = 0; i < n; ++i) a[i] = a[i] || b[i];
            return a;
        }
        case FKind::And: {
            WorldSet a = denote_env(f->lhs, m, env), b = denote_env(f->rhs, m, env);
            for (size_t i = 0; i < n; ++i) a[i] = a[i] && b[i];
            return a;
        }
        case FKind::Dia: return pre_exists(m, denote_env(f->lhs, m, env));
        case FKind::Box: return pre_forall(m, denote_env(f->lhs, m, env));
        case FKind::Mu:
        case FKind::Nu: {
            WorldSet u(n, f->kind == FKind::Nu);
            while (true) {
                env[f->name] = u;
                WorldSet next = denote_env(f->lhs, m, env);
                env.erase(f->name);
                if (next == u) return u;
                u = std::move(next);
            }
        }
    }
    throw std::logic_error("denote: unreachable");
}

}  // namespace

WorldSet denote(Formula f, const KripkeModel& m) {
    m.validate();
    std::map<std::string, WorldSet> env;
    return denote_env(f, m, env);
}

// ---------------------------------------------------------------------------
// Evaluation game
// ---------------------------------------------------------------------------

int EvalGame::index(Formula f, int world) const {
    for (size_t i = 0; i < pos_formula.size(); ++i)
        if (pos_formula[i] == f && pos_world[i] == world) return int(i);
    return -1;
}

EvalGame evaluation_game(Formula xi, const KripkeModel& m) {
    m.validate();
    if (!is_alternation_free(xi))
        throw std::invalid_argument(
            "evaluation_game: formula is not alternation-free");
    auto clos = closure({xi});
    std::vector<Formula> order(clos.begin(), clos.end());
    auto findex = [&](Formula f) {
        auto it = std::lower_bound(order.begin(), order.end(), f, FormulaLess{});
        return int(it - order.begin());
    };
    int nw = int(m.worlds.size());
    EvalGame eg;
    GameArena& g = eg.arena;
    g.n = int(order.size()) * nw;
    g.kind = WinKind::WeakParity;
    g.moves.resize(g.n);
    g.owner.resize(g.n);
    g.priority.assign(g.n, 0);
    eg.pos_formula.resize(g.n);
    eg.pos_world.resize(g.n);
    auto pos = [&](Formula f, int s) { return findex(f) * nw + s; };
    for (int fi = 0; fi < int(order.size()); ++fi) {
        Formula f = order[fi];
        for (int s = 0; s < nw; ++s) {
            int v = pos(f, s);
            eg.pos_formula[v] = f;
            eg.pos_world[v] = s;
            auto holds = [&](const std::string& p) {
                auto it = m.val.find(p);
                return it != m.val.end() && it->second[s];
            };
            switch (f->kind) {
                case FKind::Top: g.owner[v] = Player::Forall; break;
                case FKind::Bottom: g.owner[v] = Player::Exists; break;
                case FKind::Prop:
                    g.owner[v] = holds(f->name) ? Player::Forall : Player::Exists;
                    break;
                case FKind::NegProp:
                    g.owner[v] = holds(f->name) ? Player::Exists : Player::Forall;
                    break;
                case FKind::Or:
                case FKind::And:
                    g.owner[v] =
                        f->kind == FKind::Or ? Player::Exists : Player::Forall;
                    g.moves[v].push_back(pos(f->lhs, s));
                    if (f->rhs != f->lhs) g.moves[v].push_back(pos(f->rhs, s));
                    break;
                case FKind::Dia:
                case FKind::Box:
                    g.owner[v] =
                        f->kind == FKind::Dia ? Player::Exists : Player::Forall;
                    for (int t : m.rel[s]) g.moves[v].push_back(pos(f->lhs, t));
                    break;
                case FKind::Mu:
                case FKind::Nu:
                    g.moves[v].push_back(pos(unfold(f), s));
                    break;  // unowned: single forced move
            }
        }
    }
    g.initial = nw > 0 ? pos(xi, 0) : 0;
    // Weak condition: on every strongly connected component exactly one
    // fixpoint kind can regenerate, so priorities keyed by that kind are
    // constant per SCC.
    int count = 0;
    auto comp = scc_decomposition(g.n, g.moves, &count);
    std::vector<int> pri(count, 0);
    for (int v = 0; v < g.n; ++v) {
        FKind k = eg.pos_formula[v]->kind;
        if (k != FKind::Mu && k != FKind::Nu) continue;
        int want = k == FKind::Mu ? 1 : 2;
        if (pri[comp[v]] != 0 && pri[comp[v]] != want)
            throw std::logic_error(
                "evaluation_game: mixed fixpoint kinds in one component");
        pri[comp[v]] = want;
    }
    for (int v = 0; v < g.n; ++v) g.priority[v] = pri[comp[v]];
    return eg;
}

// ---------------------------------------------------------------------------
// Model checking (dual route)
// ---------------------------------------------------------------------------

bool model_check(Formula f, const KripkeModel& m, int world) {
    if (world < 0 || world >= int(m.worlds.size()))
        throw std::invalid_argument("model_check: world index out of range");
    bool den = denote(f, m)[world];
    Formula g = is_guarded(f) ? f : guard(f);
    EvalGame eg = evaluation_game(g, m);
    auto sol = solve(eg.arena);
    int v = eg.index(g, world);
    bool game = sol.winner[v] == Player::Exists;
    if (den != game)
        throw std::logic_error(
            "model_check: denotational semantics and evaluation game disagree "
            "on " + to_string(f) + " at " + m.worlds[world]);
    return den;
}

bool model_check(Formula f, const KripkeModel& m, const std::string& world) {
    int w = m.world_index(world);
    if (w < 0) throw std::invalid_argument("model_check: unknown world " + world);
    return model_check(f, m, w);
}

}  // namespace afmc
