#include "prover.hpp"

#include <map>
#include <memory>
#include <stdexcept>

namespace afmc {

namespace {

// Intermediate tree built during strategy simulation; flattened into the
// preorder node vector afterwards so that discharge nodes can be inserted
// above their companions once a cycle has actually been closed below them.
struct BNode {
    AnnotatedSequent seq;
    Rule rule = Rule::Star;
    const BNode* link = nullptr;  // Tok: companion body node; D: guarded body
    std::vector<std::unique_ptr<BNode>> kids;
};

using BPtr = std::unique_ptr<BNode>;

std::set<Formula, FormulaLess> formulas_of(const AnnotatedSequent& s) {
    std::set<Formula, FormulaLess> out;
    for (const auto& af : s) out.insert(af.f);
    return out;
}

bool has_focus(const AnnotatedSequent& s) {
    for (const auto& af : s)
        if (af.a == Ann::F) return true;
    return false;
}

struct Builder {
    const Tableau& t;
    const TableauGame& g;
    const Solution& sol;

    // One entry per simulated tableau rule on the current branch. A branch is
    // closed at the nearest ancestor with the same product position and the
    // same annotated sequent, provided no focus chain fired strictly below it
    // and a box rule fired on the segment (those are the path conditions for
    // a discharge; otherwise the node is expanded again).
    struct Occur {
        int pos;
        AnnotatedSequent sigma;
        BNode* node;
    };
    std::vector<Occur> path;
    std::vector<size_t> f_marks;  // path depths where a focus chain fired
    std::vector<size_t> m_marks;  // path depths where a box rule fired
    std::set<const BNode*> requests;
    size_t expansions = 0;

    static constexpr size_t kBudget = 200000;

    // Chain of W steps from `from` down to sub->seq (a subset), ending in sub.
    BPtr weaken_chain(const AnnotatedSequent& from, BPtr sub) {
        if (from == sub->seq) return sub;
        std::vector<AnnForm> removed;
        for (const auto& af : from)
            if (!sub->seq.count(af)) removed.push_back(af);
        for (auto it = removed.rbegin(); it != removed.rend(); ++it) {
            AnnotatedSequent below = sub->seq;
            below.insert(*it);
            auto premises = apply_rule(Rule::W, below, *it);
            if (premises.size() != 1 || premises[0] != sub->seq)
                throw std::logic_error("weaken_chain: premise mismatch");
            auto w = std::make_unique<BNode>();
            w->seq = below;
            w->rule = Rule::W;
            w->kids.push_back(std::move(sub));
            sub = std::move(w);
        }
        if (sub->seq != from) throw std::logic_error("weaken_chain: bad endpoints");
        return sub;
    }

    // Turns `top` (sequent already set) into a chain of W steps ending in
    // `sub`, mutating in place so pointers to `top` stay valid.
    void into_chain(BNode* top, BPtr sub) {
        while (true) {
            if (top->seq == sub->seq) {
                *top = std::move(*sub);
                return;
            }
            AnnForm rm{nullptr, Ann::U};
            for (const auto& af : top->seq)
                if (!sub->seq.count(af)) { rm = af; break; }
            if (!rm.f) throw std::logic_error("into_chain: not a subset");
            auto premises = apply_rule(Rule::W, top->seq, rm);
            auto child = std::make_unique<BNode>();
            child->seq = premises[0];
            BNode* nxt = child.get();
            top->rule = Rule::W;
            top->kids.clear();
            top->kids.push_back(std::move(child));
            top = nxt;
        }
    }

    // Attaches the subtree continuing at game position `next` below the
    // premise of a simulated rule, thinning unfocused duplicates first.
    BPtr descend(const AnnotatedSequent& premise, int next) {
        AnnotatedSequent thin = thinning(premise);
        if (formulas_of(thin) != t.nodes[g.pos_node[next]].seq)
            throw std::logic_error("premise does not match the successor node");
        return weaken_chain(premise, expand(next, thin));
    }

    // Subtree rooted at `sigma` (thin, formulas = the sequent of pos's node).
    BPtr expand(int pos, AnnotatedSequent sigma) {
        if (has_focus(sigma)) return body(pos, std::move(sigma));
        // Total focus: flip every formula with a chain of F steps.
        AnnotatedSequent full;
        for (const auto& af : sigma) full.insert(focused(af.f));
        f_marks.push_back(path.size());
        BPtr sub = body(pos, full);
        f_marks.pop_back();
        std::vector<AnnForm> flips(sigma.begin(), sigma.end());
        for (auto it = flips.rbegin(); it != flips.rend(); ++it) {
            AnnotatedSequent below = sub->seq;
            below.erase(focused(it->f));
            below.insert(unfocused(it->f));
            auto premises = apply_rule(Rule::F, below, unfocused(it->f));
            if (premises.size() != 1 || premises[0] != sub->seq)
                throw std::logic_error("focus chain mismatch");
            auto fn = std::make_unique<BNode>();
            fn->seq = below;
            fn->rule = Rule::F;
            fn->kids.push_back(std::move(sub));
            sub = std::move(fn);
        }
        if (sub->seq != sigma) throw std::logic_error("focus chain bad endpoints");
        return sub;
    }

    // True iff discharging against the occurrence at path index i is legal:
    // no focus chain fired strictly below it and some box rule fired at or
    // below it on the current branch.
    bool eligible(size_t i) const {
        if (!f_marks.empty() && f_marks.back() > i) return false;
        return !m_marks.empty() && m_marks.back() >= i;
    }

    BPtr body(int pos, AnnotatedSequent sigma) {
        for (size_t k = path.size(); k-- > 0;) {
            if (path[k].pos == pos && path[k].sigma == sigma && eligible(k)) {
                auto leaf = std::make_unique<BNode>();
                leaf->seq = sigma;
                leaf->rule = Rule::Tok;
                leaf->link = path[k].node;
                requests.insert(path[k].node);
                return leaf;
            }
        }
        if (++expansions > kBudget)
            throw std::logic_error("proof synthesis exceeded its expansion budget");

        const TableauNode& tn = t.nodes[g.pos_node[pos]];
        const std::vector<int>& moves = g.arena.moves[pos];
        auto n = std::make_unique<BNode>();
        n->seq = sigma;
        path.push_back({pos, sigma, n.get()});
        size_t depth = path.size() - 1;

        auto principal_of = [&](Formula f) -> AnnForm {
            if (sigma.count(focused(f))) return focused(f);
            if (sigma.count(unfocused(f))) return unfocused(f);
            throw std::logic_error("principal missing from sequent");
        };

        switch (tn.rule) {
            case TRule::Ax1: {
                AnnotatedSequent target;
                auto fs = formulas_of(sigma);
                for (const auto& af : sigma)
                    if (af.f->kind == FKind::Prop && fs.count(neg_prop(af.f->name))) {
                        target.insert(af);
                        target.insert(principal_of(neg_prop(af.f->name)));
                        break;
                    }
                if (target.size() != 2) throw std::logic_error("no complementary pair");
                apply_rule(Rule::Ax1, target);  // validates the shape
                auto ax = std::make_unique<BNode>();
                ax->seq = target;
                ax->rule = Rule::Ax1;
                into_chain(n.get(), std::move(ax));
                break;
            }
            case TRule::Ax2: {
                auto ax = std::make_unique<BNode>();
                ax->seq = {principal_of(top())};
                ax->rule = Rule::Ax2;
                apply_rule(Rule::Ax2, ax->seq);
                into_chain(n.get(), std::move(ax));
                break;
            }
            case TRule::ROr:
            case TRule::RMu:
            case TRule::RNu: {
                Rule r = tn.rule == TRule::ROr  ? Rule::ROr
                       : tn.rule == TRule::RMu ? Rule::RMu
                                               : Rule::RNu;
                auto premises = apply_rule(r, sigma, principal_of(tn.principal));
                if (premises.size() != 1 || moves.size() != 1)
                    throw std::logic_error("unexpected branching at a unary rule");
                n->rule = r;
                n->kids.push_back(descend(premises[0], moves[0]));
                break;
            }
            case TRule::RAnd: {
                auto premises = apply_rule(Rule::RAnd, sigma, principal_of(tn.principal));
                if (premises.size() != 2)
                    throw std::logic_error("conjunction rule must have two premises");
                n->rule = Rule::RAnd;
                for (const auto& prem : premises) {
                    auto fs = formulas_of(prem);
                    int next = -1;
                    for (int m : moves)
                        if (t.nodes[g.pos_node[m]].seq == fs) { next = m; break; }
                    if (next < 0) throw std::logic_error("no move matches the premise");
                    n->kids.push_back(descend(prem, next));
                }
                break;
            }
            case TRule::M: {
                if (moves.empty())
                    throw std::logic_error("winning strategy stuck at a modal node");
                int next = moves.size() == 1 ? moves[0] : sol.strategy_exists[pos];
                if (next < 0) throw std::logic_error("no strategy move at a modal node");
                const Sequent& phi_next = t.nodes[g.pos_node[next]].seq;
                AnnotatedSequent diamonds;
                for (const auto& af : sigma)
                    if (af.f->kind == FKind::Dia) diamonds.insert(af);
                Sequent stripped0;
                for (const auto& af : diamonds) stripped0.insert(af.f->lhs);
                auto matches = [&](const AnnForm& af) {
                    if (af.f->kind != FKind::Box) return false;
                    Sequent s = stripped0;
                    s.insert(af.f->lhs);
                    return s == phi_next;
                };
                // Prefer a focused box among those matching the strategy
                // move, so that focus survives the modal step whenever some
                // box trail carries it.
                AnnForm chosen{nullptr, Ann::U};
                for (const auto& af : sigma)
                    if (af.a == Ann::F && matches(af)) { chosen = af; break; }
                if (!chosen.f)
                    for (const auto& af : sigma)
                        if (matches(af)) { chosen = af; break; }
                if (!chosen.f) throw std::logic_error("no box matches the strategy move");
                // Everything but the chosen box and the diamonds is weakened
                // away before the box rule fires.
                AnnotatedSequent target = diamonds;
                target.insert(chosen);
                auto premises = apply_rule(Rule::RBox, target, chosen);
                m_marks.push_back(depth);
                auto bx = std::make_unique<BNode>();
                bx->seq = target;
                bx->rule = Rule::RBox;
                bx->kids.push_back(descend(premises[0], next));
                into_chain(n.get(), std::move(bx));
                break;
            }
        }

        while (!m_marks.empty() && m_marks.back() >= depth) m_marks.pop_back();
        path.pop_back();

        if (requests.count(n.get())) {
            requests.erase(n.get());
            auto d = std::make_unique<BNode>();
            d->seq = sigma;
            d->rule = Rule::D;
            d->link = n.get();
            d->kids.push_back(std::move(n));
            return d;
        }
        return n;
    }
};

// Preorder flattening; tokens are assigned to discharge nodes in the order
// they are emitted.
void flatten(const BNode* b, int parent, Proof& p,
             std::map<const BNode*, std::pair<int, std::string>>& d_index) {
    ProofNode pn;
    pn.seq = b->seq;
    pn.rule = b->rule;
    pn.parent = parent;
    if (b->rule == Rule::D) {
        pn.token = "x" + std::to_string(d_index.size());
    } else if (b->rule == Rule::Tok) {
        auto it = d_index.find(b->link);
        if (it == d_index.end())
            throw std::logic_error("discharged leaf precedes its companion");
        pn.companion = it->second.first;
        pn.token = it->second.second;
    }
    int idx = p.add(pn);
    if (b->rule == Rule::D) d_index[b->link] = {idx, pn.token};
    for (const auto& k : b->kids) flatten(k.get(), idx, p, d_index);
}

}  // namespace

Proof strategy_to_cyclic_proof(const Tableau& t, const TableauGame& g,
                               const Solution& sol) {
    int root = g.arena.initial;
    if (sol.winner.at(root) != Player::Exists)
        throw std::invalid_argument("the root sequent is not won by Prover");
    if (!verify_strategy(g.arena, Player::Exists, sol.strategy_exists, sol.winner))
        throw std::invalid_argument("Prover strategy fails verification");

    Builder b{t, g, sol, {}, {}, {}, {}, 0};
    AnnotatedSequent root_seq;
    for (Formula f : t.nodes[t.initial].seq) root_seq.insert(focused(f));
    BPtr tree = b.expand(root, root_seq);
    if (!b.requests.empty())
        throw std::logic_error("unresolved discharge request");

    Proof p;
    std::map<const BNode*, std::pair<int, std::string>> d_index;
    flatten(tree.get(), -1, p, d_index);
    return p;
}

DecideResult decide(const Sequent& phi, Schedule sched) {
    Tableau t = build_tableau(phi, sched);
    TableauSolution ts = solve_tableau(t);
    DecideResult r;
    if (ts.winner == Player::Exists) {
        r.valid = true;
        r.proof = strategy_to_cyclic_proof(t, ts.game, ts.sol);
    } else {
        Countermodel cm = extract_countermodel(t, ts.game, ts.sol);
        r.valid = false;
        r.model = std::move(cm.model);
        r.world = cm.world;
    }
    return r;
}

}  // namespace afmc
