#include "formula.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <unordered_set>

namespace afmc {

// ---------------------------------------------------------------------------
// Hash-consing
// ---------------------------------------------------------------------------

namespace {

struct NodeHash {
    size_t operator()(const FormulaNode* n) const { return size_t(n->hash); }
};
struct NodeEq {
    bool operator()(const FormulaNode* a, const FormulaNode* b) const {
        return a->kind == b->kind && a->name == b->name && a->lhs == b->lhs &&
               a->rhs == b->rhs;
    }
};

uint64_t mix(uint64_t h, uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

std::vector<std::string> merge_sorted(const std::vector<std::string>& a,
                                      const std::vector<std::string>& b) {
    std::vector<std::string> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// Global intern table. Nodes live for the whole process; formula workloads
// here are desk scale, so no reclamation is attempted.
std::mutex g_intern_mutex;
std::unordered_set<const FormulaNode*, NodeHash, NodeEq>& intern_table() {
    static auto* t = new std::unordered_set<const FormulaNode*, NodeHash, NodeEq>();
    return *t;
}

Formula intern(FKind kind, const std::string& name, Formula l, Formula r) {
    auto node = std::make_unique<FormulaNode>();
    node->kind = kind;
    node->name = name;
    node->lhs = l;
    node->rhs = r;
    uint64_t h = mix(uint64_t(kind) * 0x100000001b3ULL, std::hash<std::string>{}(name));
    if (l) h = mix(h, l->hash);
    if (r) h = mix(h, r->hash);
    node->hash = h ? h : 1;
    node->size = 1 + (l ? l->size : 0) + (r ? r->size : 0);
    switch (kind) {
        case FKind::Prop:
        case FKind::NegProp:
            node->fv = {name};
            break;
        case FKind::Mu:
        case FKind::Nu: {
            node->fv = l->fv;
            auto it = std::lower_bound(node->fv.begin(), node->fv.end(), name);
            if (it != node->fv.end() && *it == name) node->fv.erase(it);
            break;
        }
        default:
            if (l && r)
                node->fv = merge_sorted(l->fv, r->fv);
            else if (l)
                node->fv = l->fv;
            break;
    }
    std::lock_guard<std::mutex> lock(g_intern_mutex);
    auto [it, inserted] = intern_table().insert(node.get());
    if (inserted) node.release();
    return *it;
}

bool occurs_neg(Formula f, const std::string& x) {
    if (f->kind == FKind::NegProp) return f->name == x;
    if ((f->kind == FKind::Mu || f->kind == FKind::Nu) && f->name == x) return false;
    if (f->lhs && occurs_neg(f->lhs, x)) return true;
    if (f->rhs && occurs_neg(f->rhs, x)) return true;
    return false;
}

bool fv_contains(Formula f, const std::string& x) {
    return std::binary_search(f->fv.begin(), f->fv.end(), x);
}

}  // namespace

Formula top() { return intern(FKind::Top, "", nullptr, nullptr); }
Formula bottom() { return intern(FKind::Bottom, "", nullptr, nullptr); }
Formula prop(const std::string& p) { return intern(FKind::Prop, p, nullptr, nullptr); }
Formula neg_prop(const std::string& p) { return intern(FKind::NegProp, p, nullptr, nullptr); }
Formula f_or(Formula a, Formula b) { return intern(FKind::Or, "", a, b); }
Formula f_and(Formula a, Formula b) { return intern(FKind::And, "", a, b); }
Formula dia(Formula a) { return intern(FKind::Dia, "", a, nullptr); }
Formula box(Formula a) { return intern(FKind::Box, "", a, nullptr); }

Formula mu(const std::string& x, Formula body) {
    if (occurs_neg(body, x))
        throw FormulaError("positivity violation: ~" + x + " under binder of " + x);
    return intern(FKind::Mu, x, body, nullptr);
}
Formula nu(const std::string& x, Formula body) {
    if (occurs_neg(body, x))
        throw FormulaError("positivity violation: ~" + x + " under binder of " + x);
    return intern(FKind::Nu, x, body, nullptr);
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

const std::vector<std::string>& free_vars(Formula f) { return f->fv; }

static void collect_bv(Formula f, std::set<std::string>& out) {
    if (f->kind == FKind::Mu || f->kind == FKind::Nu) out.insert(f->name);
    if (f->lhs) collect_bv(f->lhs, out);
    if (f->rhs) collect_bv(f->rhs, out);
}

std::set<std::string> bound_vars(Formula f) {
    std::set<std::string> out;
    collect_bv(f, out);
    return out;
}

bool is_tidy(Formula f) {
    auto bv = bound_vars(f);
    for (const auto& v : f->fv)
        if (bv.count(v)) return false;
    return true;
}

bool is_literal(Formula f) { return f->kind == FKind::Prop || f->kind == FKind::NegProp; }
bool is_fixpoint(Formula f) { return f->kind == FKind::Mu || f->kind == FKind::Nu; }

int compare(Formula a, Formula b) {
    if (a == b) return 0;
    if (a->size != b->size) return a->size < b->size ? -1 : 1;
    if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
    if (int c = a->name.compare(b->name)) return c < 0 ? -1 : 1;
    if (a->lhs != b->lhs) {
        int c = compare(a->lhs, b->lhs);
        if (c) return c;
    }
    if (a->rhs || b->rhs) {
        if (!a->rhs) return -1;
        if (!b->rhs) return 1;
        return compare(a->rhs, b->rhs);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Parser {
    const std::string& s;
    size_t i = 0;

    explicit Parser(const std::string& text) : s(text) {}

    void skip() {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r'))
            ++i;
    }
    bool eat(const std::string& tok) {
        skip();
        if (s.compare(i, tok.size(), tok) == 0) {
            i += tok.size();
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& msg) {
        throw FormulaError("syntax error at offset " + std::to_string(i) + ": " + msg,
                           long(i));
    }
    bool ident_start(char c) { return isalpha(uint8_t(c)) || c == '_'; }
    bool ident_char(char c) { return isalnum(uint8_t(c)) || c == '_' || c == '\''; }

    std::string ident() {
        skip();
        if (i >= s.size() || !ident_start(s[i])) fail("expected identifier");
        size_t j = i;
        while (j < s.size() && ident_char(s[j])) ++j;
        std::string name = s.substr(i, j - i);
        i = j;
        return name;
    }

    Formula expr() {
        Formula f = conj();
        while (true) {
            skip();
            if (eat("|"))
                f = f_or(f, conj());
            else
                return f;
        }
    }
    Formula conj() {
        Formula f = unary();
        while (true) {
            skip();
            if (eat("&"))
                f = f_and(f, unary());
            else
                return f;
        }
    }
    bool keyword_at(size_t j, const std::string& kw) {
        return s.compare(j, kw.size(), kw) == 0 &&
               (j + kw.size() >= s.size() || !ident_char(s[j + kw.size()]));
    }
    Formula unary() {
        skip();
        if (i >= s.size()) fail("unexpected end of input");
        if (eat("~")) return neg_prop(ident());
        if (eat("<>")) return dia(unary());
        if (eat("[]")) return box(unary());
        if (keyword_at(i, "true")) { i += 4; return top(); }
        if (keyword_at(i, "false")) { i += 5; return bottom(); }
        if (keyword_at(i, "mu") || keyword_at(i, "nu")) {
            bool is_mu = s[i] == 'm';
            i += 2;
            std::string x = ident();
            skip();
            if (!eat(".")) fail("expected '.' after binder variable");
            Formula body = expr();  // maximal scope to the right
            size_t save = i;
            try {
                return is_mu ? mu(x, body) : nu(x, body);
            } catch (const FormulaError& e) {
                throw FormulaError(e.what(), long(save));
            }
        }
        if (eat("(")) {
            Formula f = expr();
            if (!eat(")")) fail("expected ')'");
            return f;
        }
        return prop(ident());
    }
};

}  // namespace

// Binder hygiene: rename bound variables so that they are pairwise distinct
// and disjoint from every free variable (and from `avoid`). Names are kept
// when they cause no clash.
Formula hygienic(Formula f, const std::set<std::string>& avoid) {
    std::set<std::string> used(avoid);
    used.insert(f->fv.begin(), f->fv.end());
    // env maps in-scope source binder names to their chosen names.
    std::function<Formula(Formula, std::map<std::string, std::string>&)> go =
        [&](Formula g, std::map<std::string, std::string>& env) -> Formula {
        switch (g->kind) {
            case FKind::Top:
            case FKind::Bottom:
                return g;
            case FKind::Prop: {
                auto it = env.find(g->name);
                return it == env.end() ? g : prop(it->second);
            }
            case FKind::NegProp: {
                auto it = env.find(g->name);
                return it == env.end() ? g : neg_prop(it->second);
            }
            case FKind::Or:
                return f_or(go(g->lhs, env), go(g->rhs, env));
            case FKind::And:
                return f_and(go(g->lhs, env), go(g->rhs, env));
            case FKind::Dia:
                return dia(go(g->lhs, env));
            case FKind::Box:
                return box(go(g->lhs, env));
            case FKind::Mu:
            case FKind::Nu: {
                std::string fresh =
                    used.count(g->name) ? fresh_name(g->name, used) : g->name;
                used.insert(fresh);
                auto saved = env;
                env[g->name] = fresh;
                Formula body = go(g->lhs, env);
                env = saved;
                return g->kind == FKind::Mu ? mu(fresh, body) : nu(fresh, body);
            }
        }
        throw FormulaError("unreachable");
    };
    std::map<std::string, std::string> env;
    return go(f, env);
}

std::string fresh_name(const std::string& base, const std::set<std::string>& used) {
    if (!used.count(base)) return base;
    for (int k = 1;; ++k) {
        std::string cand = base + std::to_string(k);
        if (!used.count(cand)) return cand;
    }
}

Formula parse_exact(const std::string& text) {
    Parser p(text);
    Formula f = p.expr();
    p.skip();
    if (p.i != text.size()) p.fail("trailing input");
    return f;
}

Formula parse(const std::string& text) { return hygienic(parse_exact(text)); }

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace {
// precedence levels: 0 = |, 1 = &, 2 = prefix/atom
int level(Formula f) {
    switch (f->kind) {
        case FKind::Or: return 0;
        case FKind::And: return 1;
        default: return 2;
    }
}

void print(Formula f, int min_level, std::string& out) {
    bool parens = level(f) < min_level ||
                  (is_fixpoint(f) && min_level > 0);  // binder scope is maximal
    if (parens) out += '(';
    switch (f->kind) {
        case FKind::Top: out += "true"; break;
        case FKind::Bottom: out += "false"; break;
        case FKind::Prop: out += f->name; break;
        case FKind::NegProp: out += '~'; out += f->name; break;
        case FKind::Or:
            print(f->lhs, 0, out);
            out += " | ";
            print(f->rhs, 1, out);
            break;
        case FKind::And:
            print(f->lhs, 1, out);
            out += " & ";
            print(f->rhs, 2, out);
            break;
        case FKind::Dia: out += "<>"; print(f->lhs, 2, out); break;
        case FKind::Box: out += "[]"; print(f->lhs, 2, out); break;
        case FKind::Mu:
        case FKind::Nu:
            out += (f->kind == FKind::Mu ? "mu " : "nu ");
            out += f->name;
            out += ". ";
            print(f->lhs, 0, out);
            break;
    }
    if (parens) out += ')';
}
}  // namespace

std::string to_string(Formula f) {
    std::string out;
    print(f, 0, out);
    return out;
}

// ---------------------------------------------------------------------------
// Dual / negation / substitution / unfolding
// ---------------------------------------------------------------------------

Formula boolean_dual(Formula f) {
    switch (f->kind) {
        case FKind::Top: return bottom();
        case FKind::Bottom: return top();
        case FKind::Prop:
        case FKind::NegProp: return f;
        case FKind::Or: return f_and(boolean_dual(f->lhs), boolean_dual(f->rhs));
        case FKind::And: return f_or(boolean_dual(f->lhs), boolean_dual(f->rhs));
        case FKind::Dia: return box(boolean_dual(f->lhs));
        case FKind::Box: return dia(boolean_dual(f->lhs));
        case FKind::Mu: return nu(f->name, boolean_dual(f->lhs));
        case FKind::Nu: return mu(f->name, boolean_dual(f->lhs));
    }
    throw FormulaError("unreachable");
}

namespace {
// Swap p <-> ~p for every letter in `letters` (free occurrences only; the
// letters never appear bound in a tidy formula).
Formula swap_literals(Formula f, const std::set<std::string>& letters) {
    switch (f->kind) {
        case FKind::Top:
        case FKind::Bottom: return f;
        case FKind::Prop:
            return letters.count(f->name) ? neg_prop(f->name) : f;
        case FKind::NegProp:
            return letters.count(f->name) ? prop(f->name) : f;
        case FKind::Or: return f_or(swap_literals(f->lhs, letters), swap_literals(f->rhs, letters));
        case FKind::And: return f_and(swap_literals(f->lhs, letters), swap_literals(f->rhs, letters));
        case FKind::Dia: return dia(swap_literals(f->lhs, letters));
        case FKind::Box: return box(swap_literals(f->lhs, letters));
        case FKind::Mu: return mu(f->name, swap_literals(f->lhs, letters));
        case FKind::Nu: return nu(f->name, swap_literals(f->lhs, letters));
    }
    throw FormulaError("unreachable");
}
}  // namespace

Formula negation(Formula f) {
    std::set<std::string> letters(f->fv.begin(), f->fv.end());
    return swap_literals(boolean_dual(f), letters);
}

Formula substitute(Formula chi, const std::string& x, Formula xi) {
    if (!fv_contains(chi, x)) return chi;
    if (occurs_neg(chi, x))
        throw FormulaError("substitute: ~" + x + " occurs in the target formula");
    for (const auto& v : xi->fv)
        if (bound_vars(chi).count(v))
            throw FormulaError("substitute: capture risk, " + v +
                               " is bound in the target formula");
    std::function<Formula(Formula)> go = [&](Formula g) -> Formula {
        if (!fv_contains(g, x)) return g;
        switch (g->kind) {
            case FKind::Prop: return g->name == x ? xi : g;
            case FKind::Or: return f_or(go(g->lhs), go(g->rhs));
            case FKind::And: return f_and(go(g->lhs), go(g->rhs));
            case FKind::Dia: return dia(go(g->lhs));
            case FKind::Box: return box(go(g->lhs));
            case FKind::Mu: return mu(g->name, go(g->lhs));
            case FKind::Nu: return nu(g->name, go(g->lhs));
            default: return g;  // Top/Bottom/NegProp(!=x) have no free x
        }
    };
    return go(chi);
}

Formula unfold(Formula f) {
    if (!is_fixpoint(f)) throw FormulaError("unfold: not a fixpoint formula");
    return substitute(f->lhs, f->name, f);
}

// ---------------------------------------------------------------------------
// Closure
// ---------------------------------------------------------------------------

std::vector<Formula> clos0(Formula f) {
    switch (f->kind) {
        case FKind::Top:
        case FKind::Bottom:
        case FKind::Prop:
        case FKind::NegProp:
            return {};
        case FKind::Or:
        case FKind::And:
            return {f->lhs, f->rhs};
        case FKind::Dia:
        case FKind::Box:
            return {f->lhs};
        case FKind::Mu:
        case FKind::Nu:
            return {unfold(f)};
    }
    throw FormulaError("unreachable");
}

bool is_clos0_successor(Formula from, Formula to) {
    for (Formula g : clos0(from))
        if (g == to) return true;
    return false;
}

std::set<Formula, FormulaLess> closure(const std::vector<Formula>& seed) {
    std::set<Formula, FormulaLess> out;
    std::deque<Formula> work(seed.begin(), seed.end());
    while (!work.empty()) {
        Formula f = work.front();
        work.pop_front();
        if (!out.insert(f).second) continue;
        for (Formula g : clos0(f)) work.push_back(g);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Guardedness
// ---------------------------------------------------------------------------

namespace {
// Does x occur free and unguarded (not under a modality) in f?
bool unguarded_in(Formula f, const std::string& x) {
    switch (f->kind) {
        case FKind::Prop: return f->name == x;
        case FKind::NegProp: return f->name == x;
        case FKind::Or:
        case FKind::And:
            return unguarded_in(f->lhs, x) || unguarded_in(f->rhs, x);
        case FKind::Mu:
        case FKind::Nu:
            return f->name != x && unguarded_in(f->lhs, x);
        default:
            return false;  // Top/Bottom/Dia/Box
    }
}
}  // namespace

bool is_guarded(Formula f) {
    if (is_fixpoint(f) && unguarded_in(f->lhs, f->name)) return false;
    if (f->lhs && !is_guarded(f->lhs)) return false;
    if (f->rhs && !is_guarded(f->rhs)) return false;
    return true;
}

namespace {

// Eliminate unguarded occurrences of x from a binder body, using
//   mu x. (x & a) | b  ==  mu x. b      and dually
//   nu x. (x | a) & b  ==  nu x. b
// where all occurrences of x in b are guarded. decompose() rewrites the body
// into that shape; inner fixpoints that contain x unguarded are unfolded once
// (their own variable is already guarded at this point, so the copies they
// introduce sit under modalities).
Formula decompose_rest(Formula f, const std::string& x, bool for_mu);

Formula decompose_rest(Formula f, const std::string& x, bool for_mu) {
    if (!unguarded_in(f, x)) return f;
    switch (f->kind) {
        case FKind::Prop:  // f == x
            return for_mu ? bottom() : top();
        case FKind::Or: {
            Formula l = decompose_rest(f->lhs, x, for_mu);
            Formula r = decompose_rest(f->rhs, x, for_mu);
            return f_or(l, r);
        }
        case FKind::And: {
            Formula l = decompose_rest(f->lhs, x, for_mu);
            Formula r = decompose_rest(f->rhs, x, for_mu);
            return f_and(l, r);
        }
        case FKind::Mu:
        case FKind::Nu:
            // x occurs unguarded inside: unfold once (the binder's own
            // variable is guarded by prior recursion, so substituted copies
            // are modal-guarded) and continue.
            return decompose_rest(unfold(f), x, for_mu);
        default:
            return f;  // guarded contexts handled by the !unguarded_in check
    }
}

Formula guard_rec(Formula f) {
    switch (f->kind) {
        case FKind::Or: return f_or(guard_rec(f->lhs), guard_rec(f->rhs));
        case FKind::And: return f_and(guard_rec(f->lhs), guard_rec(f->rhs));
        case FKind::Dia: return dia(guard_rec(f->lhs));
        case FKind::Box: return box(guard_rec(f->lhs));
        case FKind::Mu:
        case FKind::Nu: {
            Formula body = guard_rec(f->lhs);  // inner binders now guarded
            if (unguarded_in(body, f->name))
                body = decompose_rest(body, f->name, f->kind == FKind::Mu);
            return f->kind == FKind::Mu ? mu(f->name, body) : nu(f->name, body);
        }
        default:
            return f;
    }
}

}  // namespace

Formula guard(Formula f) { return hygienic(guard_rec(f)); }

// ---------------------------------------------------------------------------
// Alternation freeness
// ---------------------------------------------------------------------------

namespace {
// Does x occur free in f inside the scope of a binder of kind `bad`?
bool free_under(Formula f, const std::string& x, FKind bad, bool inside) {
    switch (f->kind) {
        case FKind::Prop:
        case FKind::NegProp:
            return inside && f->name == x;
        case FKind::Mu:
        case FKind::Nu: {
            if (f->name == x) return false;
            return free_under(f->lhs, x, bad, inside || f->kind == bad);
        }
        default:
            if (f->lhs && free_under(f->lhs, x, bad, inside)) return true;
            if (f->rhs && free_under(f->rhs, x, bad, inside)) return true;
            return false;
    }
}
}  // namespace

bool is_alternation_free(Formula f) {
    // Niwinski: for every subformula eta x. phi, no free occurrence of x in
    // phi lies in the scope of an eta-bar operator.
    if (f->kind == FKind::Mu && free_under(f->lhs, f->name, FKind::Nu, false)) return false;
    if (f->kind == FKind::Nu && free_under(f->lhs, f->name, FKind::Mu, false)) return false;
    if (f->lhs && !is_alternation_free(f->lhs)) return false;
    if (f->rhs && !is_alternation_free(f->rhs)) return false;
    return true;
}

bool theta_member(Formula f, Eta eta, const std::set<std::string>& q) {
    // psi-clause: any alternation-free formula whose free variables avoid Q.
    bool touches_q = false;
    for (const auto& v : f->fv)
        if (q.count(v)) { touches_q = true; break; }
    if (!touches_q) return is_alternation_free(f);
    switch (f->kind) {
        case FKind::Prop:
            return q.count(f->name) > 0;  // plain letter q in Q
        case FKind::NegProp:
            return false;  // ~q is not admitted when q in Q
        case FKind::Or:
        case FKind::And:
            return theta_member(f->lhs, eta, q) && theta_member(f->rhs, eta, q);
        case FKind::Dia:
        case FKind::Box:
            return theta_member(f->lhs, eta, q);
        case FKind::Mu: {
            if (eta != Eta::Mu) return false;
            auto q2 = q;
            q2.insert(f->name);
            return theta_member(f->lhs, eta, q2);
        }
        case FKind::Nu: {
            if (eta != Eta::Nu) return false;
            auto q2 = q;
            q2.insert(f->name);
            return theta_member(f->lhs, eta, q2);
        }
        default:
            return false;  // Top/Bottom are FV-free, handled above
    }
}

// ---------------------------------------------------------------------------
// Trace classification
// ---------------------------------------------------------------------------

Eta classify_trace(const TraceLasso& t) {
    if (t.loop.empty()) throw FormulaError("classify_trace: empty loop");
    auto check_step = [](Formula a, Formula b) {
        if (!is_clos0_successor(a, b))
            throw FormulaError("classify_trace: consecutive elements violate ->_C");
    };
    for (size_t i = 0; i + 1 < t.prefix.size(); ++i) check_step(t.prefix[i], t.prefix[i + 1]);
    if (!t.prefix.empty()) check_step(t.prefix.back(), t.loop.front());
    for (size_t i = 0; i + 1 < t.loop.size(); ++i) check_step(t.loop[i], t.loop[i + 1]);
    check_step(t.loop.back(), t.loop.front());

    bool has_mu = false, has_nu = false;
    for (Formula f : t.loop) {
        if (f->kind == FKind::Mu) has_mu = true;
        if (f->kind == FKind::Nu) has_nu = true;
    }
    if (has_mu && has_nu)
        throw FormulaError("classify_trace: loop contains both mu- and nu-formulas "
                           "(non-alternation-free input)");
    if (!has_mu && !has_nu)
        throw FormulaError("classify_trace: loop contains no fixpoint formula");
    return has_mu ? Eta::Mu : Eta::Nu;
}

}  // namespace afmc
