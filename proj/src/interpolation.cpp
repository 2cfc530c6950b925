#include "interpolation.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

namespace afmc {

namespace {

bool has_focused(const AnnotatedSequent& s) {
    return std::any_of(s.begin(), s.end(),
                       [](const AnnForm& af) { return af.a == Ann::F; });
}

std::set<std::string> letters_of(const AnnotatedSequent& s) {
    std::set<std::string> out;
    for (const auto& af : s)
        for (const auto& v : free_vars(af.f)) out.insert(v);
    return out;
}

// Which formulas a rule application writes into a premise, and on which side
// they land: everything a rule produces goes to its principal's side, except
// that at a box rule each stripped diamond follows its own diamond, with the
// box body winning collisions.
//   0 = left, 1 = right
std::map<AnnForm, int> active_outputs(const RuleInstance& inst,
                                      const AnnotatedSequent& conclusion,
                                      int premise_index,
                                      const AnnotatedSequent& left) {
    std::map<AnnForm, int> out;
    auto side_of = [&](const AnnForm& af) { return left.count(af) ? 0 : 1; };
    if (!inst.principal && inst.rule != Rule::RBox) return out;
    switch (inst.rule) {
        case Rule::ROr: {
            int s = side_of(*inst.principal);
            out[{inst.principal->f->lhs, inst.principal->a}] = s;
            out[{inst.principal->f->rhs, inst.principal->a}] = s;
            break;
        }
        case Rule::RAnd: {
            int s = side_of(*inst.principal);
            Formula conj = premise_index == 0 ? inst.principal->f->lhs
                                              : inst.principal->f->rhs;
            out[{conj, inst.principal->a}] = s;
            break;
        }
        case Rule::RMu:
            out[{unfold(inst.principal->f), Ann::U}] = side_of(*inst.principal);
            break;
        case Rule::RNu:
            out[{unfold(inst.principal->f), inst.principal->a}] =
                side_of(*inst.principal);
            break;
        case Rule::RBox: {
            out[{inst.principal->f->lhs, inst.principal->a}] =
                side_of(*inst.principal);
            for (const auto& af : conclusion) {
                if (af.f->kind != FKind::Dia) continue;
                AnnForm strip{af.f->lhs, af.a};
                if (!out.count(strip)) out[strip] = side_of(af);
            }
            break;
        }
        case Rule::F:
            out[{inst.principal->f, Ann::F}] = side_of(*inst.principal);
            break;
        case Rule::U:
            out[{inst.principal->f, Ann::U}] = side_of(*inst.principal);
            break;
        default:
            break;  // W, D: nothing new
    }
    return out;
}

// Split of one premise given the conclusion's split.
std::pair<AnnotatedSequent, AnnotatedSequent> split_premise(
    const RuleInstance& inst, const AnnotatedSequent& conclusion,
    const AnnotatedSequent& premise, int premise_index,
    const AnnotatedSequent& left, const AnnotatedSequent& right) {
    auto active = active_outputs(inst, conclusion, premise_index, left);
    AnnotatedSequent pl, pr;
    for (const auto& af : premise) {
        auto it = active.find(af);
        if (it != active.end()) {
            (it->second == 0 ? pl : pr).insert(af);
        } else if (left.count(af)) {
            pl.insert(af);
        } else if (right.count(af)) {
            pr.insert(af);
        } else {
            throw std::logic_error("premise formula with no side: " +
                                   to_string(af.f));
        }
    }
    return {pl, pr};
}

RuleInstance instance_or_throw(const Proof& p, int v) {
    auto inst = rule_instance(p, v);
    if (!inst)
        throw std::invalid_argument("node " + std::to_string(v) +
                                    " matches no rule instance");
    return *inst;
}

}  // namespace

NodewisePartition induce_partition(const Proof& p, const AnnotatedSequent& gl,
                                   const AnnotatedSequent& gr) {
    if (p.nodes.empty()) throw std::invalid_argument("empty proof");
    AnnotatedSequent both;
    for (const auto& af : gl) both.insert(af);
    for (const auto& af : gr) both.insert(af);
    if (both != p.nodes[0].seq || both.size() != gl.size() + gr.size())
        throw std::invalid_argument("root split does not partition the root");

    NodewisePartition np;
    np.left.resize(p.nodes.size());
    np.right.resize(p.nodes.size());
    np.left[0] = gl;
    np.right[0] = gr;
    // Nodes are in preorder, so parents precede children.
    for (size_t v = 0; v < p.nodes.size(); ++v) {
        const ProofNode& n = p.nodes[v];
        if (n.children.empty()) continue;
        auto inst = instance_or_throw(p, int(v));
        auto premises = apply_rule(inst.rule, n.seq, inst.principal, inst.retain);
        for (size_t c = 0; c < n.children.size(); ++c) {
            int pi = inst.premise_of_child[c];
            auto [pl, pr] = split_premise(inst, n.seq, premises[pi], pi,
                                          np.left[v], np.right[v]);
            np.left[n.children[c]] = pl;
            np.right[n.children[c]] = pr;
        }
    }
    return np;
}

bool is_balanced(const Proof& p, const NodewisePartition& np) {
    for (size_t v = 0; v < p.nodes.size(); ++v)
        if (p.nodes[v].rule == Rule::Tok) {
            int c = p.nodes[v].companion;
            if (np.left[v] != np.left[c] || np.right[v] != np.right[c])
                return false;
        }
    return true;
}

// ---------------------------------------------------------------------------
// Balancing by unravel-and-cut
// ---------------------------------------------------------------------------

namespace {

struct UNode {
    AnnotatedSequent seq;
    Rule rule = Rule::Star;
    const UNode* link = nullptr;
    std::vector<std::unique_ptr<UNode>> kids;
};
using UPtr = std::unique_ptr<UNode>;

struct Balancer {
    const Proof& p;
    std::vector<RuleInstance> inst;                    // per original node
    std::vector<std::vector<AnnotatedSequent>> prems;  // per original node

    struct Occur {
        AnnotatedSequent seq, left;
        UNode* node;
    };
    std::vector<Occur> path;
    std::vector<size_t> f_marks, m_marks, g_marks;
    std::set<const UNode*> requests;
    size_t expansions = 0;
    static constexpr size_t kBudget = 500000;

    bool eligible(size_t i) const {
        if (!f_marks.empty() && f_marks.back() >= i) return false;
        if (!g_marks.empty() && g_marks.back() >= i) return false;
        return !m_marks.empty() && m_marks.back() >= i;
    }

    UPtr walk(int v, AnnotatedSequent left) {
        const ProofNode& n = p.nodes[v];
        if (n.rule == Rule::D) return walk(n.children[0], std::move(left));
        if (n.rule == Rule::Tok)
            return walk(p.nodes[n.companion].children[0], std::move(left));
        if (n.rule == Rule::Star)
            throw std::invalid_argument("cannot balance a proof with open assumptions");

        for (size_t k = path.size(); k-- > 0;) {
            if (path[k].seq == n.seq && path[k].left == left && eligible(k)) {
                auto leaf = std::make_unique<UNode>();
                leaf->seq = n.seq;
                leaf->rule = Rule::Tok;
                leaf->link = path[k].node;
                requests.insert(path[k].node);
                return leaf;
            }
        }
        if (++expansions > kBudget)
            throw std::logic_error("balancing exceeded its expansion budget");

        auto u = std::make_unique<UNode>();
        u->seq = n.seq;
        u->rule = n.rule;
        path.push_back({n.seq, left, u.get()});
        size_t depth = path.size() - 1;
        if (n.rule == Rule::F || n.rule == Rule::U) f_marks.push_back(depth);
        if (n.rule == Rule::RBox) m_marks.push_back(depth);
        if (!has_focused(n.seq)) g_marks.push_back(depth);

        AnnotatedSequent right;
        for (const auto& af : n.seq)
            if (!left.count(af)) right.insert(af);
        for (size_t c = 0; c < n.children.size(); ++c) {
            int pi = inst[v].premise_of_child[c];
            auto [pl, pr] = split_premise(inst[v], n.seq, prems[v][pi], pi,
                                          left, right);
            (void)pr;
            u->kids.push_back(walk(n.children[c], pl));
        }

        while (!f_marks.empty() && f_marks.back() >= depth) f_marks.pop_back();
        while (!m_marks.empty() && m_marks.back() >= depth) m_marks.pop_back();
        while (!g_marks.empty() && g_marks.back() >= depth) g_marks.pop_back();
        path.pop_back();

        if (requests.count(u.get())) {
            requests.erase(u.get());
            auto d = std::make_unique<UNode>();
            d->seq = u->seq;
            d->rule = Rule::D;
            d->link = u.get();
            d->kids.push_back(std::move(u));
            return d;
        }
        return u;
    }
};

void flatten_u(const UNode* b, int parent, Proof& out,
               std::map<const UNode*, std::pair<int, std::string>>& d_index) {
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
    int idx = out.add(pn);
    if (b->rule == Rule::D) d_index[b->link] = {idx, pn.token};
    for (const auto& k : b->kids) flatten_u(k.get(), idx, out, d_index);
}

}  // namespace

std::pair<Proof, NodewisePartition> balance(const Proof& p,
                                            const NodewisePartition& np) {
    if (p.nodes.empty()) throw std::invalid_argument("empty proof");
    // Reject discharge nodes that discharge nothing rather than repairing
    // them away during the unravelling.
    std::set<int> discharged;
    for (const auto& n : p.nodes)
        if (n.rule == Rule::Tok) discharged.insert(n.companion);
    for (size_t v = 0; v < p.nodes.size(); ++v)
        if (p.nodes[v].rule == Rule::D && !discharged.count(int(v)))
            throw std::invalid_argument(
                "discharge node without a discharged leaf");

    Balancer b{p, {}, {}, {}, {}, {}, {}, {}, 0};
    b.inst.resize(p.nodes.size());
    b.prems.resize(p.nodes.size());
    for (size_t v = 0; v < p.nodes.size(); ++v) {
        if (p.nodes[v].children.empty()) continue;
        b.inst[v] = instance_or_throw(p, int(v));
        b.prems[v] = apply_rule(b.inst[v].rule, p.nodes[v].seq,
                                b.inst[v].principal, b.inst[v].retain);
    }
    UPtr tree = b.walk(0, np.left[0]);
    if (!b.requests.empty()) throw std::logic_error("unresolved discharge request");

    Proof out;
    std::map<const UNode*, std::pair<int, std::string>> d_index;
    flatten_u(tree.get(), -1, out, d_index);
    return {out, induce_partition(out, np.left[0], np.right[0])};
}

// ---------------------------------------------------------------------------
// Connectedness and colouring
// ---------------------------------------------------------------------------

std::vector<int> connectedness_classes(const Proof& p) {
    std::vector<int> uf(p.nodes.size());
    for (size_t i = 0; i < uf.size(); ++i) uf[i] = int(i);
    auto find = [&](int x) {
        while (uf[x] != x) x = uf[x] = uf[uf[x]];
        return x;
    };
    std::vector<bool> on_interval(p.nodes.size(), false);
    for (size_t v = 0; v < p.nodes.size(); ++v) {
        if (p.nodes[v].rule != Rule::Tok) continue;
        int c = p.nodes[v].companion;
        for (int u = int(v);; u = p.nodes[u].parent) {
            on_interval[u] = true;
            uf[find(u)] = find(int(v));
            if (u == c) break;
            if (u < 0) throw std::logic_error("companion is not an ancestor");
        }
    }
    std::vector<int> cls(p.nodes.size(), -1);
    std::map<int, int> dense;
    for (size_t v = 0; v < p.nodes.size(); ++v) {
        if (!on_interval[v]) continue;
        int r = find(int(v));
        auto [it, fresh] = dense.emplace(r, int(dense.size()));
        cls[v] = it->second;
        (void)fresh;
    }
    return cls;
}

std::vector<FixColour> fixpoint_colouring(const Proof& p,
                                          const NodewisePartition& np) {
    auto cls = connectedness_classes(p);
    int nclasses = 0;
    for (int c : cls) nclasses = std::max(nclasses, c + 1);
    std::vector<bool> left_all(nclasses, true), right_all(nclasses, true);
    for (size_t v = 0; v < p.nodes.size(); ++v) {
        if (cls[v] < 0) continue;
        if (!has_focused(np.left[v])) left_all[cls[v]] = false;
        if (!has_focused(np.right[v])) right_all[cls[v]] = false;
    }
    std::vector<FixColour> colour(p.nodes.size(), FixColour::Check);
    for (size_t v = 0; v < p.nodes.size(); ++v) {
        if (cls[v] < 0) continue;
        if (left_all[cls[v]]) {
            colour[v] = FixColour::Mu;
        } else if (right_all[cls[v]]) {
            colour[v] = FixColour::Nu;
        } else {
            throw std::invalid_argument(
                "connectedness class with no uniformly focused side");
        }
    }
    return colour;
}

// ---------------------------------------------------------------------------
// Interpolants
// ---------------------------------------------------------------------------

Formula simple_negation(Formula f, const std::set<std::string>& tokens) {
    switch (f->kind) {
        case FKind::Top: return bottom();
        case FKind::Bottom: return top();
        case FKind::Prop:
            return tokens.count(f->name) ? f : neg_prop(f->name);
        case FKind::NegProp: return prop(f->name);
        case FKind::Or:
            return f_and(simple_negation(f->lhs, tokens),
                         simple_negation(f->rhs, tokens));
        case FKind::And:
            return f_or(simple_negation(f->lhs, tokens),
                        simple_negation(f->rhs, tokens));
        case FKind::Dia: return box(simple_negation(f->lhs, tokens));
        case FKind::Box: return dia(simple_negation(f->lhs, tokens));
        case FKind::Mu:
        case FKind::Nu: {
            auto inner = tokens;
            inner.insert(f->name);
            Formula body = simple_negation(f->lhs, inner);
            return f->kind == FKind::Mu ? nu(f->name, body) : mu(f->name, body);
        }
    }
    throw std::logic_error("unreachable");
}

namespace {

// Smart constructors: collapse units, absorbing elements, duplicate
// operands, and fixpoints that do not use their variable. Keeping
// interpolants reduced as they are assembled is what makes re-proving
// them tractable.
Formula s_or(Formula a, Formula b) {
    if (a->kind == FKind::Bottom) return b;
    if (b->kind == FKind::Bottom) return a;
    if (a->kind == FKind::Top || b->kind == FKind::Top) return top();
    if (a == b) return a;
    return f_or(a, b);
}

Formula s_and(Formula a, Formula b) {
    if (a->kind == FKind::Top) return b;
    if (b->kind == FKind::Top) return a;
    if (a->kind == FKind::Bottom || b->kind == FKind::Bottom) return bottom();
    if (a == b) return a;
    return f_and(a, b);
}

Formula s_dia(Formula a) { return a->kind == FKind::Bottom ? bottom() : dia(a); }

Formula s_box(Formula a) { return a->kind == FKind::Top ? top() : box(a); }

bool uses_var(Formula body, const std::string& x) {
    const auto& fv = free_vars(body);
    return std::find(fv.begin(), fv.end(), x) != fv.end();
}

Formula s_mu(const std::string& x, Formula body) {
    if (body->kind == FKind::Prop && body->name == x) return bottom();
    if (!uses_var(body, x)) return body;
    return mu(x, body);
}

Formula s_nu(const std::string& x, Formula body) {
    if (body->kind == FKind::Prop && body->name == x) return top();
    if (!uses_var(body, x)) return body;
    return nu(x, body);
}

struct InterpolantBuilder {
    const Proof& p;
    const NodewisePartition& np;
    const std::vector<FixColour>& colour;
    std::vector<int> cls;
    std::map<int, std::string> token_var;  // D node -> variable name
    std::map<int, std::string> canon_var;  // binder depth -> canonical name
    std::set<std::string> all_letters;

    // Tokens of connected strict-ancestor companions: the variables that may
    // occur free in this node's interpolant.
    std::set<std::string> x_of(int s) const {
        std::set<std::string> out;
        if (cls[s] < 0) return out;
        for (int u = p.nodes[s].parent; u >= 0; u = p.nodes[u].parent)
            if (p.nodes[u].rule == Rule::D && cls[u] == cls[s])
                out.insert(token_var.at(u));
        return out;
    }

    Formula build(int s) {
        const ProofNode& n = p.nodes[s];
        Formula result = nullptr;
        if (n.rule == Rule::Tok) {
            result = prop(token_var.at(n.companion));
        } else if (n.rule == Rule::D) {
            if (colour[s] == FixColour::Check)
                throw std::invalid_argument(
                    "companion node without a fixpoint colour");
            Formula body = build(n.children[0]);
            // Rename the token variable to a name determined by the binder
            // nesting depth, so that duplicated subproofs yield literally
            // identical fixpoint formulas and get merged by the idempotence
            // rules of the smart constructors.
            int depth = 0;
            for (int u = n.parent; u >= 0; u = p.nodes[u].parent)
                if (p.nodes[u].rule == Rule::D) ++depth;
            const std::string& x = canon_var.at(depth);
            body = substitute(body, token_var.at(s), prop(x));
            result = colour[s] == FixColour::Mu ? s_mu(x, body) : s_nu(x, body);
        } else if (n.rule == Rule::Star) {
            throw std::invalid_argument(
                "cannot interpolate a proof with open assumptions");
        } else if (n.rule == Rule::Ax1) {
            Formula pos = nullptr, neg = nullptr;
            for (const auto& af : n.seq)
                (af.f->kind == FKind::Prop ? pos : neg) = af.f;
            bool pos_left = np.left[s].count({pos, Ann::F}) ||
                            np.left[s].count({pos, Ann::U});
            bool neg_left = np.left[s].count({neg, Ann::F}) ||
                            np.left[s].count({neg, Ann::U});
            if (pos_left && neg_left) result = bottom();
            else if (!pos_left && !neg_left) result = top();
            else if (pos_left) result = neg;
            else result = pos;
        } else if (n.rule == Rule::Ax2) {
            result = np.left[s].empty() ? top() : bottom();
        } else {
            auto inst = instance_or_throw(p, s);
            if (n.rule == Rule::RAnd) {
                Formula by_premise[2] = {nullptr, nullptr};
                for (size_t c = 0; c < n.children.size(); ++c)
                    by_premise[inst.premise_of_child[c]] = build(n.children[c]);
                bool left = np.left[s].count(*inst.principal) != 0;
                result = left ? s_or(by_premise[0], by_premise[1])
                              : s_and(by_premise[0], by_premise[1]);
            } else if (n.rule == Rule::RBox) {
                Formula sub = build(n.children[0]);
                bool left = np.left[s].count(*inst.principal) != 0;
                result = left ? s_dia(sub) : s_box(sub);
            } else {
                result = build(n.children[0]);  // ROr, RMu, RNu, W, F, U
            }
        }

        // Vocabulary invariant: free variables of the interpolant are common
        // to both sides, plus the open discharge tokens.
        auto ls = letters_of(np.left[s]), rs = letters_of(np.right[s]);
        auto xs = x_of(s);
        for (const auto& v : free_vars(result))
            if (!(ls.count(v) && rs.count(v)) && !xs.count(v))
                throw std::logic_error("interpolant vocabulary violation at node " +
                                       std::to_string(s) + ": " + v);
        // Fragment invariant: coloured nodes produce formulas in the
        // noetherian fragment of their colour over the open discharge tokens,
        // so binding those tokens later keeps the result alternation-free.
        if (colour[s] != FixColour::Check) {
            Eta eta = colour[s] == FixColour::Mu ? Eta::Mu : Eta::Nu;
            if (!theta_member(result, eta, xs))
                throw std::logic_error("interpolant fragment violation at node " +
                                       std::to_string(s));
        }
        return result;
    }
};

}  // namespace

Formula interpolant(const Proof& p, const NodewisePartition& np,
                    const std::vector<FixColour>& colour) {
    if (!is_balanced(p, np))
        throw std::invalid_argument("partition is not balanced");
    InterpolantBuilder b{p, np, colour, connectedness_classes(p), {}, {}, {}};
    std::set<std::string> used;
    for (const auto& n : p.nodes)
        for (const auto& af : n.seq) {
            for (const auto& v : free_vars(af.f)) used.insert(v);
            for (const auto& v : bound_vars(af.f)) used.insert(v);
        }
    b.all_letters = used;
    int d_count = 0;
    for (size_t v = 0; v < p.nodes.size(); ++v)
        if (p.nodes[v].rule == Rule::D) {
            std::string x = fresh_name("x", used);
            used.insert(x);
            b.token_var[int(v)] = x;
            ++d_count;
        }
    for (int d = 0; d < d_count; ++d) {
        std::string x = fresh_name("x", used);
        used.insert(x);
        b.canon_var[d] = x;
    }
    Formula theta = b.build(0);
    for (const auto& v : free_vars(theta))
        if (b.all_letters.count(v) == 0)
            throw std::logic_error("interpolant has a free token: " + v);
    return theta;
}

Formula simplify_interpolant(Formula f) {
    switch (f->kind) {
        case FKind::Or:
            return s_or(simplify_interpolant(f->lhs),
                        simplify_interpolant(f->rhs));
        case FKind::And:
            return s_and(simplify_interpolant(f->lhs),
                         simplify_interpolant(f->rhs));
        case FKind::Dia: return s_dia(simplify_interpolant(f->lhs));
        case FKind::Box: return s_box(simplify_interpolant(f->lhs));
        case FKind::Mu: return s_mu(f->name, simplify_interpolant(f->lhs));
        case FKind::Nu: return s_nu(f->name, simplify_interpolant(f->lhs));
        default:
            return f;
    }
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

InterpolateDetail interpolate_detail(Formula phi, Formula psi) {
    Formula nphi = negation(phi);
    Sequent root{nphi, psi};
    auto r = decide(root);
    if (!r.valid) throw InvalidImplication(std::move(r.model), r.world);

    AnnotatedSequent gl, gr;
    // When ¬φ and ψ coincide, the sequent is a singleton; the formula goes
    // right, and the left side is empty (φ → ψ then means ψ is valid).
    if (nphi != psi) gl.insert(focused(nphi));
    gr.insert(focused(psi));

    auto np0 = induce_partition(r.proof, gl, gr);
    auto [bal, np] = balance(r.proof, np0);
    auto colour = fixpoint_colouring(bal, np);
    Formula theta = interpolant(bal, np, colour);

    InterpolateDetail d;
    d.theta = theta;
    d.simplified = simplify_interpolant(theta);
    for (auto c : colour) {
        d.mu_nodes += c == FixColour::Mu;
        d.nu_nodes += c == FixColour::Nu;
        d.check_nodes += c == FixColour::Check;
    }

    std::set<std::string> common;
    for (const auto& v : free_vars(phi)) common.insert(v);
    for (const auto& v : free_vars(theta)) {
        bool in_phi = common.count(v) != 0;
        bool in_psi = std::count(free_vars(psi).begin(), free_vars(psi).end(), v);
        if (!in_phi || !in_psi)
            throw std::logic_error("interpolant vocabulary violation: " + v);
    }
    if (!is_alternation_free(theta))
        throw std::logic_error("interpolant is not alternation-free");

    d.left_valid = decide(Sequent{negation(phi), theta}).valid;
    d.right_valid = decide(Sequent{negation(theta), psi}).valid;
    return d;
}

Formula interpolate(Formula phi, Formula psi) {
    auto d = interpolate_detail(phi, psi);
    if (!d.left_valid || !d.right_valid)
        throw std::logic_error("interpolant failed re-proving");
    return d.theta;
}

}  // namespace afmc
