#include "proofs.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace afmc {

// ---------------------------------------------------------------------------
// Sequents
// ---------------------------------------------------------------------------

bool is_thin(const AnnotatedSequent& s) {
    for (const auto& af : s)
        if (af.a == Ann::U && s.count({af.f, Ann::F})) return false;
    return true;
}

AnnotatedSequent thinning(const AnnotatedSequent& s) {
    AnnotatedSequent t;
    for (const auto& af : s)
        if (af.a == Ann::F || !s.count({af.f, Ann::F})) t.insert(af);
    return t;
}

bool more_focus(const AnnotatedSequent& gamma, const AnnotatedSequent& sigma) {
    for (const auto& af : gamma)
        if (!sigma.count(af) && !(af.a == Ann::U && sigma.count({af.f, Ann::F})))
            return false;
    return true;
}

namespace {

// Least fixpoint of Γ ↦ Σ ∪ Q₀(Γ) inside `universe` × {u,f}.
std::set<AnnForm> backwards_closure_in(const AnnotatedSequent& sigma,
                                       const std::set<Formula, FormulaLess>& universe) {
    std::set<AnnForm> cur(sigma.begin(), sigma.end());
    bool changed = true;
    while (changed) {
        changed = false;
        for (Formula f : universe) {
            for (Ann a : {Ann::U, Ann::F}) {
                if (cur.count({f, a})) continue;
                bool in = false;
                // clause 1: φ^b present for some b ⊒ a
                if (a == Ann::U && cur.count({f, Ann::F})) in = true;
                // clause 2: disjunction with both disjuncts present at a
                if (!in && f->kind == FKind::Or && cur.count({f->lhs, a}) &&
                    cur.count({f->rhs, a}))
                    in = true;
                // clause 3: conjunction with one conjunct present at a
                if (!in && f->kind == FKind::And &&
                    (cur.count({f->lhs, a}) || cur.count({f->rhs, a})))
                    in = true;
                // clause 4: μ-formula whose unfolding is present at u
                if (!in && f->kind == FKind::Mu && cur.count({unfold(f), Ann::U}))
                    in = true;
                // clause 5: ν-formula whose unfolding is present at a
                if (!in && f->kind == FKind::Nu && cur.count({unfold(f), a}))
                    in = true;
                if (in) {
                    cur.insert({f, a});
                    changed = true;
                }
            }
        }
    }
    return cur;
}

std::set<Formula, FormulaLess> closure_of(const AnnotatedSequent& s) {
    std::vector<Formula> seed;
    for (const auto& af : s) seed.push_back(af.f);
    return closure(seed);
}

// γ ⊆ Q(σ). The universe must cover γ's formulas, which need not lie in
// closure(σ) (composites are built upward from their parts).
bool q_covers_impl(const AnnotatedSequent& gamma, const AnnotatedSequent& sigma) {
    std::vector<Formula> seed;
    for (const auto& af : gamma) seed.push_back(af.f);
    for (const auto& af : sigma) seed.push_back(af.f);
    auto q = backwards_closure_in(sigma, closure(seed));
    for (const auto& af : gamma)
        if (!q.count(af)) return false;
    return true;
}

}  // namespace

std::set<AnnForm> backwards_closure(const AnnotatedSequent& sigma) {
    return backwards_closure_in(sigma, closure_of(sigma));
}

bool q_covers(const AnnotatedSequent& gamma, const AnnotatedSequent& sigma) {
    return q_covers_impl(gamma, sigma);
}

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

const char* rule_name(Rule r) {
    switch (r) {
        case Rule::Ax1: return "Ax1";
        case Rule::Ax2: return "Ax2";
        case Rule::ROr: return "ROr";
        case Rule::RAnd: return "RAnd";
        case Rule::RBox: return "RBox";
        case Rule::RMu: return "RMu";
        case Rule::RNu: return "RNu";
        case Rule::W: return "W";
        case Rule::F: return "F";
        case Rule::U: return "U";
        case Rule::D: return "D";
        case Rule::Tok: return "Tok";
        case Rule::Star: return "Star";
    }
    return "?";
}

std::optional<Rule> rule_from_name(const std::string& name) {
    for (Rule r : {Rule::Ax1, Rule::Ax2, Rule::ROr, Rule::RAnd, Rule::RBox,
                   Rule::RMu, Rule::RNu, Rule::W, Rule::F, Rule::U, Rule::D,
                   Rule::Tok, Rule::Star})
        if (name == rule_name(r)) return r;
    return std::nullopt;
}

int Proof::add(ProofNode n) {
    int idx = int(nodes.size());
    if (n.parent >= 0) nodes[n.parent].children.push_back(idx);
    nodes.push_back(std::move(n));
    return idx;
}

void Proof::relink() {
    for (auto& n : nodes) n.children.clear();
    for (size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].parent >= 0) nodes[nodes[i].parent].children.push_back(int(i));
}

std::vector<AnnotatedSequent> apply_rule(Rule r, const AnnotatedSequent& conclusion,
                                         std::optional<AnnForm> principal,
                                         bool retain) {
    auto need = [&](bool ok, const std::string& why) {
        if (!ok) throw std::invalid_argument("rule " + std::string(rule_name(r)) +
                                             " not applicable: " + why);
    };
    auto context = [&](const AnnForm& pr) {
        AnnotatedSequent ctx = conclusion;
        if (!retain) ctx.erase(pr);
        return ctx;
    };
    switch (r) {
        case Rule::Ax1: {
            need(conclusion.size() == 2, "conclusion must be exactly {p^a, ~p^b}");
            auto it = conclusion.begin();
            AnnForm x = *it++, y = *it;
            bool ok = (x.f->kind == FKind::Prop && y.f->kind == FKind::NegProp &&
                       x.f->name == y.f->name) ||
                      (x.f->kind == FKind::NegProp && y.f->kind == FKind::Prop &&
                       x.f->name == y.f->name);
            need(ok, "conclusion must be a literal and its negation");
            return {};
        }
        case Rule::Ax2: {
            need(conclusion.size() == 1 &&
                     conclusion.begin()->f->kind == FKind::Top,
                 "conclusion must be exactly {true^a}");
            return {};
        }
        case Rule::ROr: {
            need(principal.has_value() && conclusion.count(*principal),
                 "principal must occur in the conclusion");
            need(principal->f->kind == FKind::Or, "principal must be a disjunction");
            AnnotatedSequent prem = context(*principal);
            prem.insert({principal->f->lhs, principal->a});
            prem.insert({principal->f->rhs, principal->a});
            return {prem};
        }
        case Rule::RAnd: {
            need(principal.has_value() && conclusion.count(*principal),
                 "principal must occur in the conclusion");
            need(principal->f->kind == FKind::And, "principal must be a conjunction");
            AnnotatedSequent l = context(*principal), rr = l;
            l.insert({principal->f->lhs, principal->a});
            rr.insert({principal->f->rhs, principal->a});
            return {l, rr};
        }
        case Rule::RBox: {
            need(principal.has_value() && conclusion.count(*principal),
                 "principal must occur in the conclusion");
            need(principal->f->kind == FKind::Box, "principal must be a box formula");
            need(!retain, "the box rule consumes its whole conclusion");
            AnnotatedSequent prem{{principal->f->lhs, principal->a}};
            for (const auto& af : conclusion) {
                if (af == *principal) continue;
                need(af.f->kind == FKind::Dia,
                     "context must consist of diamond formulas");
                prem.insert({af.f->lhs, af.a});
            }
            return {prem};
        }
        case Rule::RMu:
        case Rule::RNu: {
            need(principal.has_value() && conclusion.count(*principal),
                 "principal must occur in the conclusion");
            FKind want = r == Rule::RMu ? FKind::Mu : FKind::Nu;
            need(principal->f->kind == want, "principal must be a fixpoint of the "
                                             "matching kind");
            AnnotatedSequent prem = context(*principal);
            // the μ-unfolding loses focus; the ν-unfolding keeps its annotation
            prem.insert({unfold(principal->f),
                         r == Rule::RMu ? Ann::U : principal->a});
            return {prem};
        }
        case Rule::W: {
            need(principal.has_value() && conclusion.count(*principal),
                 "principal must occur in the conclusion");
            need(!retain, "weakening removes its principal");
            AnnotatedSequent prem = conclusion;
            prem.erase(*principal);
            need(!prem.empty(), "sequents must stay non-empty");
            return {prem};
        }
        case Rule::F:
        case Rule::U: {
            Ann from = r == Rule::F ? Ann::U : Ann::F;
            Ann to = r == Rule::F ? Ann::F : Ann::U;
            need(principal.has_value() && principal->a == from &&
                     conclusion.count(*principal),
                 r == Rule::F ? "principal must occur unfocused"
                              : "principal must occur focused");
            AnnotatedSequent prem = conclusion;
            prem.erase(*principal);
            prem.insert({principal->f, to});
            return {prem};
        }
        case Rule::D:
            return {conclusion};
        case Rule::Tok:
        case Rule::Star:
            need(false, "leaf labels have no premises");
    }
    return {};
}

// ---------------------------------------------------------------------------
// Rule-instance matching
// ---------------------------------------------------------------------------

namespace {

using Instance = RuleInstance;

// Finds principal/retain data making the node's children match apply_rule.
// `progressive_only` restricts to retain = false.
std::optional<Instance> find_instance(const Proof& p, int node,
                                      bool progressive_only = false) {
    const ProofNode& n = p.nodes[node];
    std::vector<AnnotatedSequent> kids;
    for (int c : n.children) kids.push_back(p.nodes[c].seq);
    auto attempt = [&](std::optional<AnnForm> pr, bool retain)
        -> std::optional<Instance> {
        std::vector<AnnotatedSequent> prem;
        try {
            prem = apply_rule(n.rule, n.seq, pr, retain);
        } catch (const std::invalid_argument&) {
            return std::nullopt;
        }
        if (prem.size() != kids.size()) return std::nullopt;
        if (prem.size() == 2) {
            if (kids[0] == prem[0] && kids[1] == prem[1])
                return Instance{n.rule, pr, retain, {0, 1}};
            if (kids[0] == prem[1] && kids[1] == prem[0])
                return Instance{n.rule, pr, retain, {1, 0}};
            return std::nullopt;
        }
        for (size_t i = 0; i < prem.size(); ++i)
            if (kids[i] != prem[i]) return std::nullopt;
        std::vector<int> ids(prem.size());
        for (size_t i = 0; i < ids.size(); ++i) ids[i] = int(i);
        return Instance{n.rule, pr, retain, ids};
    };
    switch (n.rule) {
        case Rule::Ax1:
        case Rule::Ax2:
        case Rule::D:
            return attempt(std::nullopt, false);
        case Rule::Tok:
        case Rule::Star:
            return kids.empty() ? std::optional<Instance>(Instance{n.rule, {}, false, {}})
                                : std::nullopt;
        default:
            for (const auto& af : n.seq) {
                if (auto inst = attempt(af, false)) return inst;
                if (!progressive_only)
                    if (auto inst = attempt(af, true)) return inst;
            }
            return std::nullopt;
    }
}

int depth_of(const Proof& p, int node) {
    int d = 0;
    for (int v = node; p.nodes[v].parent >= 0; v = p.nodes[v].parent) ++d;
    return d;
}

bool is_ancestor(const Proof& p, int anc, int node) {
    for (int v = node; v >= 0; v = p.nodes[v].parent)
        if (v == anc) return true;
    return false;
}

bool has_focused(const AnnotatedSequent& s) {
    return std::any_of(s.begin(), s.end(),
                       [](const AnnForm& af) { return af.a == Ann::F; });
}

}  // namespace

// ---------------------------------------------------------------------------
// Checker
// ---------------------------------------------------------------------------

std::vector<Violation> check_proof(const Proof& input, bool allow_assumptions) {
    Proof p = input;
    p.relink();
    std::vector<Violation> out;
    auto bad = [&](int node, std::string cond, std::string msg) {
        out.push_back({node, std::move(cond), std::move(msg)});
    };
    if (p.nodes.empty()) {
        bad(-1, "C1", "empty proof");
        return out;
    }
    // Structural sanity: single root, acyclic parents.
    for (size_t i = 0; i < p.nodes.size(); ++i) {
        int par = p.nodes[i].parent;
        if ((i == 0) != (par < 0)) {
            bad(int(i), "C1", "exactly node 0 must be the root");
            return out;
        }
        if (par >= int(p.nodes.size()) || par == int(i) ||
            (par >= 0 && par > int(i))) {
            bad(int(i), "C1", "parents must precede their children (preorder)");
            return out;
        }
    }

    for (size_t i = 0; i < p.nodes.size(); ++i) {
        const ProofNode& n = p.nodes[i];
        if (n.seq.empty()) bad(int(i), "C1", "sequents must be non-empty");
        switch (n.rule) {
            case Rule::Tok:
            case Rule::Star:
                if (!n.children.empty())
                    bad(int(i), "C2", "token/star labels are only allowed on leaves");
                if (n.rule == Rule::Star && !allow_assumptions)
                    bad(int(i), "open", "open assumption in a closed proof");
                break;
            default:
                if (!find_instance(p, int(i)))
                    bad(int(i), "C1",
                        std::string("premises do not match rule ") +
                            rule_name(n.rule));
        }
        if (n.rule == Rule::D && n.token.empty())
            bad(int(i), "C1", "discharge rule needs a token");
    }

    // Condition 3: discharge bookkeeping.
    std::map<std::string, std::vector<int>> d_nodes;
    for (size_t i = 0; i < p.nodes.size(); ++i)
        if (p.nodes[i].rule == Rule::D) d_nodes[p.nodes[i].token].push_back(int(i));
    for (size_t i = 0; i < p.nodes.size(); ++i) {
        const ProofNode& n = p.nodes[i];
        if (n.rule != Rule::Tok) continue;
        if (n.token.empty()) {
            bad(int(i), "C3", "discharged leaf needs a token");
            continue;
        }
        auto it = d_nodes.find(n.token);
        if (it == d_nodes.end() || it->second.size() != 1) {
            bad(int(i), "C3",
                "exactly one discharge node must carry token " + n.token);
            continue;
        }
        int comp = it->second[0];
        if (n.companion >= 0 && n.companion != comp)
            bad(int(i), "C3", "companion does not carry the leaf's token");
        if (!is_ancestor(p, comp, int(i)) || depth_of(p, int(i)) < depth_of(p, comp) + 2) {
            bad(int(i), "C3",
                "companion and its child must be proper ancestors of the leaf");
            continue;
        }
        if (p.nodes[comp].seq != n.seq) {
            bad(int(i), "C3", "companion sequent differs from the leaf sequent");
            continue;
        }
        // Condition 4 on the companion-to-leaf path.
        bool saw_box = false;
        for (int v = int(i); v != comp; v = p.nodes[v].parent) {
            Rule r = p.nodes[v].rule;
            if (r == Rule::F || r == Rule::U)
                bad(int(i), "C4a", "focus rule on a companion-to-leaf path");
            if (r == Rule::RBox) saw_box = true;
            if (!has_focused(p.nodes[v].seq))
                bad(int(i), "C4c", "node without a focused formula on a "
                                   "companion-to-leaf path");
        }
        if (!has_focused(p.nodes[comp].seq))
            bad(int(i), "C4c",
                "node without a focused formula on a companion-to-leaf path");
        if (!saw_box)
            bad(int(i), "C4b", "no box rule on a companion-to-leaf path");
    }
    return out;
}

bool is_thin_proof(const Proof& input) {
    Proof p = input;
    p.relink();
    for (size_t i = 0; i < p.nodes.size(); ++i) {
        const ProofNode& n = p.nodes[i];
        if (is_thin(n.seq)) continue;
        // A non-thin sequent must immediately weaken an unfocused duplicate.
        if (n.rule != Rule::W || n.children.size() != 1) return false;
        const AnnotatedSequent& prem = p.nodes[n.children[0]].seq;
        AnnForm dropped{};
        bool found = false;
        for (const auto& af : n.seq)
            if (!prem.count(af)) { dropped = af; found = true; break; }
        if (!found || dropped.a != Ann::U || !n.seq.count({dropped.f, Ann::F}))
            return false;
    }
    return true;
}

bool is_progressive(const Proof& input) {
    Proof p = input;
    p.relink();
    for (size_t i = 0; i < p.nodes.size(); ++i) {
        Rule r = p.nodes[i].rule;
        if (r != Rule::ROr && r != Rule::RAnd && r != Rule::RMu && r != Rule::RNu)
            continue;
        if (!find_instance(p, int(i), /*progressive_only=*/true)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Trails
// ---------------------------------------------------------------------------

TrailRel edge_trails(const Proof& input, int node, int child_index) {
    Proof p = input;
    p.relink();
    const ProofNode& n = p.nodes[node];
    if (child_index < 0 || child_index >= int(n.children.size()))
        throw std::invalid_argument("edge_trails: no such child");
    const AnnotatedSequent& prem = p.nodes[n.children[child_index]].seq;
    auto inst = find_instance(p, node, /*progressive_only=*/true);
    if (!inst) inst = find_instance(p, node);
    if (!inst) throw std::invalid_argument("edge_trails: node does not match its rule");
    TrailRel t;
    auto passive_context = [&](const AnnotatedSequent& ctx) {
        for (const auto& af : ctx)
            if (prem.count(af)) t.passive.push_back({af, af});
    };
    switch (n.rule) {
        case Rule::ROr: {
            AnnForm pr = *inst->principal;
            t.active.push_back({pr, {pr.f->lhs, pr.a}});
            t.active.push_back({pr, {pr.f->rhs, pr.a}});
            AnnotatedSequent ctx = n.seq;
            ctx.erase(pr);
            passive_context(ctx);
            break;
        }
        case Rule::RAnd: {
            AnnForm pr = *inst->principal;
            Formula res = inst->premise_of_child[child_index] == 0 ? pr.f->lhs
                                                                   : pr.f->rhs;
            t.active.push_back({pr, {res, pr.a}});
            AnnotatedSequent ctx = n.seq;
            ctx.erase(pr);
            passive_context(ctx);
            break;
        }
        case Rule::RBox: {
            AnnForm pr = *inst->principal;
            t.active.push_back({pr, {pr.f->lhs, pr.a}});
            for (const auto& af : n.seq)
                if (!(af == pr)) t.active.push_back({af, {af.f->lhs, af.a}});
            break;
        }
        case Rule::RMu:
        case Rule::RNu: {
            AnnForm pr = *inst->principal;
            Ann res = n.rule == Rule::RMu ? Ann::U : pr.a;
            t.active.push_back({pr, {unfold(pr.f), res}});
            AnnotatedSequent ctx = n.seq;
            ctx.erase(pr);
            passive_context(ctx);
            break;
        }
        case Rule::W:
            passive_context(prem);
            break;
        case Rule::F:
        case Rule::U: {
            AnnForm pr = *inst->principal;
            Ann to = n.rule == Rule::F ? Ann::F : Ann::U;
            t.passive.push_back({pr, {pr.f, to}});
            AnnotatedSequent ctx = n.seq;
            ctx.erase(pr);
            passive_context(ctx);
            break;
        }
        case Rule::D:
            passive_context(n.seq);
            break;
        default:
            throw std::invalid_argument("edge_trails: leaf rules have no edges");
    }
    return t;
}

std::vector<std::pair<AnnForm, AnnForm>> proof_trails(const Proof& input,
                                                      const std::vector<int>& path) {
    Proof p = input;
    p.relink();
    if (path.empty()) return {};
    std::vector<std::pair<AnnForm, AnnForm>> rel;
    for (const auto& af : p.nodes[path[0]].seq) rel.push_back({af, af});
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        int u = path[i], v = path[i + 1];
        std::vector<std::pair<AnnForm, AnnForm>> step;
        if (p.nodes[u].rule == Rule::Tok && p.nodes[u].companion == v) {
            for (const auto& af : p.nodes[u].seq) step.push_back({af, af});
        } else {
            auto it = std::find(p.nodes[u].children.begin(),
                                p.nodes[u].children.end(), v);
            if (it == p.nodes[u].children.end())
                throw std::invalid_argument("proof_trails: path is not connected");
            TrailRel t = edge_trails(p, u, int(it - p.nodes[u].children.begin()));
            step = t.active;
            step.insert(step.end(), t.passive.begin(), t.passive.end());
        }
        std::vector<std::pair<AnnForm, AnnForm>> next;
        for (const auto& [a, b] : rel)
            for (const auto& [c, d] : step)
                if (b == c) next.push_back({a, d});
        std::sort(next.begin(), next.end(),
                  [](const auto& x, const auto& y) {
                      if (x.first < y.first) return true;
                      if (y.first < x.first) return false;
                      return x.second < y.second;
                  });
        next.erase(std::unique(next.begin(), next.end()), next.end());
        rel = std::move(next);
    }
    return rel;
}

bool nu_trail_exists(const Proof& input, const std::vector<int>& loop) {
    Proof p = input;
    p.relink();
    if (loop.empty()) return false;
    int k = int(loop.size());
    // States: (loop index, annotated formula that is not a μ-formula).
    std::vector<std::vector<AnnForm>> forms(k);
    for (int i = 0; i < k; ++i)
        for (const auto& af : p.nodes[loop[i]].seq)
            if (af.f->kind != FKind::Mu) forms[i].push_back(af);
    auto state = [&](int i, int j) {
        int id = 0;
        for (int x = 0; x < i; ++x) id += int(forms[x].size());
        return id + j;
    };
    int total = 0;
    for (int i = 0; i < k; ++i) total += int(forms[i].size());
    std::vector<std::vector<int>> adj(total);
    for (int i = 0; i < k; ++i) {
        int u = loop[i], v = loop[(i + 1) % k];
        std::vector<std::pair<AnnForm, AnnForm>> step;
        if (p.nodes[u].rule == Rule::Tok) {
            // back edge to the companion: identity trail
            for (const auto& af : p.nodes[u].seq) step.push_back({af, af});
        } else {
            auto it = std::find(p.nodes[u].children.begin(),
                                p.nodes[u].children.end(), v);
            if (it == p.nodes[u].children.end())
                throw std::invalid_argument("nu_trail_exists: loop not connected");
            TrailRel t = edge_trails(p, u, int(it - p.nodes[u].children.begin()));
            step = t.active;
            step.insert(step.end(), t.passive.begin(), t.passive.end());
        }
        for (const auto& [a, b] : step) {
            if (a.f->kind == FKind::Mu || b.f->kind == FKind::Mu) continue;
            auto ia = std::find(forms[i].begin(), forms[i].end(), a);
            auto ib = std::find(forms[(i + 1) % k].begin(),
                                forms[(i + 1) % k].end(), b);
            if (ia == forms[i].end() || ib == forms[(i + 1) % k].end()) continue;
            adj[state(i, int(ia - forms[i].begin()))]
                .push_back(state((i + 1) % k, int(ib - forms[(i + 1) % k].begin())));
        }
    }
    // Any cycle in this product graph yields a trail around the loop whose
    // tightening avoids μ-formulas (the loop's box rule rules out trails that
    // are eventually stationary).
    for (int s = 0; s < total; ++s) {
        std::vector<bool> seen(total, false);
        std::vector<int> stack{s};
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w : adj[v]) {
                if (w == s) return true;
                if (!seen[w]) { seen[w] = true; stack.push_back(w); }
            }
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Simulation of basic steps
// ---------------------------------------------------------------------------

namespace {

// Extends the proof upward from `at` (whose sequent must be a superset of
// `to`) with weakenings until the sequent equals `to`; returns the top node.
int weaken_to(Proof& pr, int at, const AnnotatedSequent& to) {
    while (pr.nodes[at].seq != to) {
        AnnForm extra{};
        bool found = false;
        for (const auto& af : pr.nodes[at].seq)
            if (!to.count(af)) { extra = af; found = true; break; }
        if (!found)
            throw std::invalid_argument("weaken_to: target is not a subset");
        pr.nodes[at].rule = Rule::W;
        AnnotatedSequent next = pr.nodes[at].seq;
        next.erase(extra);
        at = pr.add({next, Rule::Star, at, {}, -1, ""});
    }
    return at;
}

// Star leaf at a thinned sequent, weakening unfocused duplicates first.
int star_thinned(Proof& pr, int at) {
    at = weaken_to(pr, at, thinning(pr.nodes[at].seq));
    pr.nodes[at].rule = Rule::Star;
    return at;
}

}  // namespace

Proof simulate_basic_step(const Proof& basic_input, const AnnotatedSequent& gamma_p) {
    Proof basic = basic_input;
    basic.relink();
    if (basic.nodes.empty()) throw std::invalid_argument("simulate: empty proof");
    const ProofNode& root = basic.nodes[0];
    for (int c : root.children)
        if (basic.nodes[c].rule != Rule::Star)
            throw std::invalid_argument("simulate: input is not basic");
    if (root.rule == Rule::D || root.rule == Rule::Tok || root.rule == Rule::Star)
        throw std::invalid_argument("simulate: input is not basic");
    if (!is_thin(gamma_p))
        throw std::invalid_argument("simulate: target sequent must be thin");
    const AnnotatedSequent& gamma = root.seq;
    if (!q_covers(gamma, gamma_p))
        throw std::invalid_argument(
            "simulate: conclusion not in the backwards closure of the target");

    Proof out;
    out.add({gamma_p, Rule::Star, -1, {}, -1, ""});

    auto inst = find_instance(basic, 0, /*progressive_only=*/true);
    if (!inst) inst = find_instance(basic, 0);
    if (!inst) throw std::invalid_argument("simulate: root does not match its rule");

    // For a principal φ^a, the stronger-annotated occurrence in gamma_p if any.
    auto occurrence = [&](const AnnForm& pr) -> std::optional<AnnForm> {
        if (gamma_p.count({pr.f, Ann::F})) return AnnForm{pr.f, Ann::F};
        if (pr.a == Ann::U && gamma_p.count({pr.f, Ann::U}))
            return AnnForm{pr.f, Ann::U};
        return std::nullopt;
    };

    switch (root.rule) {
        case Rule::Ax1: {
            AnnotatedSequent target;
            for (const auto& af : root.seq) {
                auto occ = occurrence(af);
                if (!occ)
                    throw std::invalid_argument(
                        "simulate: axiom literals must occur in the target");
                target.insert(*occ);
            }
            int top = weaken_to(out, 0, target);
            out.nodes[top].rule = Rule::Ax1;
            break;
        }
        case Rule::Ax2: {
            auto occ = occurrence(*root.seq.begin());
            if (!occ)
                throw std::invalid_argument(
                    "simulate: top must occur in the target");
            int top = weaken_to(out, 0, {*occ});
            out.nodes[top].rule = Rule::Ax2;
            break;
        }
        case Rule::ROr:
        case Rule::RMu:
        case Rule::RNu: {
            AnnForm pr = *inst->principal;
            auto occ = occurrence(pr);
            if (!occ) break;  // premise already covered: Γ' is the assumption
            out.nodes[0].rule = root.rule;
            auto prem = apply_rule(root.rule, gamma_p, *occ)[0];
            int leaf = out.add({prem, Rule::Star, 0, {}, -1, ""});
            star_thinned(out, leaf);
            break;
        }
        case Rule::RAnd: {
            AnnForm pr = *inst->principal;
            auto occ = occurrence(pr);
            if (!occ) break;
            out.nodes[0].rule = Rule::RAnd;
            for (const auto& prem : apply_rule(Rule::RAnd, gamma_p, *occ)) {
                int leaf = out.add({prem, Rule::Star, 0, {}, -1, ""});
                star_thinned(out, leaf);
            }
            break;
        }
        case Rule::RBox: {
            AnnForm pr = *inst->principal;
            auto occ = occurrence(pr);
            if (!occ)
                throw std::invalid_argument(
                    "simulate: box principal must occur in the target");
            // Keep the principal box and every diamond; weaken the rest.
            AnnotatedSequent keep{*occ};
            for (const auto& af : gamma_p)
                if (af.f->kind == FKind::Dia) keep.insert(af);
            int at = weaken_to(out, 0, keep);
            out.nodes[at].rule = Rule::RBox;
            auto prem = apply_rule(Rule::RBox, keep, *occ)[0];
            int leaf = out.add({prem, Rule::Star, at, {}, -1, ""});
            star_thinned(out, leaf);
            break;
        }
        case Rule::W:
        case Rule::U:
            break;  // Γ' itself covers the premise
        case Rule::F: {
            // Focus everything: F* up to (Γ')^f.
            int at = 0;
            while (true) {
                auto it = std::find_if(
                    out.nodes[at].seq.begin(), out.nodes[at].seq.end(),
                    [](const AnnForm& af) { return af.a == Ann::U; });
                if (it == out.nodes[at].seq.end()) break;
                out.nodes[at].rule = Rule::F;
                AnnotatedSequent next = out.nodes[at].seq;
                AnnForm flip = *it;
                next.erase(flip);
                next.insert({flip.f, Ann::F});
                at = out.add({next, Rule::Star, at, {}, -1, ""});
            }
            break;
        }
        default:
            throw std::invalid_argument("simulate: unsupported root rule");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Unraveling
// ---------------------------------------------------------------------------

namespace {

void unravel_rec(const Proof& p, int node, int budget, Proof& out, int parent) {
    // Splice out discharge nodes.
    while (p.nodes[node].rule == Rule::D) {
        if (p.nodes[node].children.size() != 1)
            throw std::invalid_argument("unravel: malformed discharge node");
        node = p.nodes[node].children[0];
    }
    const ProofNode& n = p.nodes[node];
    if (n.rule == Rule::Tok) {
        if (budget > 0) {
            int comp = n.companion;
            if (comp < 0)
                throw std::invalid_argument("unravel: token leaf without companion");
            unravel_rec(p, comp, budget - 1, out, parent);
        } else {
            out.add({n.seq, Rule::Star, parent, {}, -1, ""});
        }
        return;
    }
    int idx = out.add({n.seq, n.rule, parent, {}, -1, ""});
    for (int c : n.children) unravel_rec(p, c, budget, out, idx);
}

}  // namespace

Proof unravel_prefix(const Proof& input, int depth) {
    Proof p = input;
    p.relink();
    Proof out;
    unravel_rec(p, 0, depth, out, -1);
    return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string to_string(const AnnotatedSequent& s) {
    std::string r;
    for (const auto& af : s) {
        if (!r.empty()) r += ", ";
        r += to_string(af.f) + (af.a == Ann::F ? "^f" : "^u");
    }
    return r;
}

nlohmann::json proof_to_json(const Proof& p) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : p.nodes) {
        nlohmann::json seq = nlohmann::json::array();
        for (const auto& af : n.seq)
            seq.push_back({to_string(af.f), af.a == Ann::F ? "f" : "u"});
        nlohmann::json jn;
        jn["seq"] = std::move(seq);
        jn["rule"] = rule_name(n.rule);
        jn["parent"] = n.parent >= 0 ? nlohmann::json(n.parent) : nullptr;
        jn["companion"] = n.companion >= 0 ? nlohmann::json(n.companion) : nullptr;
        jn["token"] = !n.token.empty() ? nlohmann::json(n.token) : nullptr;
        nodes.push_back(std::move(jn));
    }
    return nlohmann::json{{"nodes", std::move(nodes)}};
}

Proof proof_from_json(const nlohmann::json& j) {
    Proof p;
    if (!j.is_object() || !j.contains("nodes") || !j.at("nodes").is_array())
        throw std::invalid_argument("proof: expected {\"nodes\": [...]}");
    for (const auto& jn : j.at("nodes")) {
        ProofNode n;
        for (const auto& e : jn.at("seq")) {
            if (!e.is_array() || e.size() != 2)
                throw std::invalid_argument("proof: sequent entries are pairs");
            std::string ann = e[1].get<std::string>();
            if (ann != "f" && ann != "u")
                throw std::invalid_argument("proof: annotation must be f or u");
            n.seq.insert({parse_exact(e[0].get<std::string>()),
                          ann == "f" ? Ann::F : Ann::U});
        }
        auto r = rule_from_name(jn.at("rule").get<std::string>());
        if (!r) throw std::invalid_argument("proof: unknown rule " +
                                            jn.at("rule").get<std::string>());
        n.rule = *r;
        n.parent = jn.contains("parent") && !jn.at("parent").is_null()
                       ? jn.at("parent").get<int>()
                       : -1;
        n.companion = jn.contains("companion") && !jn.at("companion").is_null()
                          ? jn.at("companion").get<int>()
                          : -1;
        if (jn.contains("token") && !jn.at("token").is_null())
            n.token = jn.at("token").get<std::string>();
        p.nodes.push_back(std::move(n));
    }
    p.relink();
    return p;
}

namespace {

std::string latex_formula(Formula f) {
    std::string s = to_string(f);
    std::string out = "\\mathtt{";
    for (char c : s) {
        if (c == '<') out += "\\langle ";
        else if (c == '>') out += "\\rangle ";
        else if (c == '[') out += "[";
        else if (c == ']') out += "]";
        else if (c == '~') out += "\\neg ";
        else if (c == '&') out += "\\land ";
        else if (c == '|') out += "\\lor ";
        else out += c;
    }
    return out + "}";
}

std::string latex_sequent(const AnnotatedSequent& s) {
    std::string r;
    for (const auto& af : s) {
        if (!r.empty()) r += ", ";
        r += latex_formula(af.f) + "^{" + (af.a == Ann::F ? "f" : "u") + "}";
    }
    return r;
}

std::string latex_label(Rule r, const std::string& token) {
    switch (r) {
        case Rule::Ax1: return "\\mathsf{Ax1}";
        case Rule::Ax2: return "\\mathsf{Ax2}";
        case Rule::ROr: return "\\mathsf{R}_{\\lor}";
        case Rule::RAnd: return "\\mathsf{R}_{\\land}";
        case Rule::RBox: return "\\mathsf{R}_{\\Box}";
        case Rule::RMu: return "\\mathsf{R}_{\\mu}";
        case Rule::RNu: return "\\mathsf{R}_{\\nu}";
        case Rule::W: return "\\mathsf{W}";
        case Rule::F: return "\\mathsf{F}";
        case Rule::U: return "\\mathsf{U}";
        case Rule::D: return "\\mathsf{D}^{" + token + "}";
        default: return "";
    }
}

void latex_rec(const Proof& p, int node, std::string& out) {
    const ProofNode& n = p.nodes[node];
    if (n.rule == Rule::Tok) {
        out += "\\AxiomC{$[" + latex_sequent(n.seq) + "]^{" + n.token + "}$}\n";
        return;
    }
    if (n.rule == Rule::Star) {
        out += "\\AxiomC{$\\star\\; " + latex_sequent(n.seq) + "$}\n";
        return;
    }
    for (int c : n.children) latex_rec(p, c, out);
    if (n.children.empty()) out += "\\AxiomC{}\n";
    out += "\\RightLabel{$" + latex_label(n.rule, n.token) + "$}\n";
    const char* inf = n.children.size() == 2 ? "\\BinaryInfC" : "\\UnaryInfC";
    out += std::string(inf) + "{$" + latex_sequent(n.seq) + "$}\n";
}

}  // namespace

std::string proof_to_latex(const Proof& input) {
    Proof p = input;
    p.relink();
    std::string out = "\\begin{prooftree}\n";
    if (!p.nodes.empty()) latex_rec(p, 0, out);
    out += "\\end{prooftree}\n";
    return out;
}

std::optional<RuleInstance> rule_instance(const Proof& p, int node) {
    return find_instance(p, node);
}

}  // namespace afmc
