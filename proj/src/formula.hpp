// formula.hpp — core formula algebra for the alternation-free modal mu-calculus.
//
// Formulas are immutable, hash-consed nodes; equality is pointer equality.
// All stored formulas are tidy (FV and BV disjoint) when produced by the
// parser or by the documented operations. A fixed total order (size, then
// structural/lexicographic) makes every downstream tie-break deterministic.

#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace afmc {

enum class FKind : uint8_t {
    Top,
    Bottom,
    Prop,     // positive literal p
    NegProp,  // negative literal ~p
    Or,
    And,
    Dia,  // <>
    Box,  // []
    Mu,
    Nu,
};

struct FormulaNode;
using Formula = const FormulaNode*;

struct FormulaNode {
    FKind kind;
    std::string name;  // letter for Prop/NegProp, bound variable for Mu/Nu
    Formula lhs = nullptr;  // left child / unary body / binder body
    Formula rhs = nullptr;  // right child of Or/And
    uint32_t size = 1;      // node count, used by the total order
    uint64_t hash = 0;
    std::vector<std::string> fv;  // sorted free letters (~p counts as free p)
};

// Thrown on parse errors, positivity violations and operation precondition
// failures. `pos` is a byte offset into the source text, or -1.
struct FormulaError : std::runtime_error {
    long pos;
    explicit FormulaError(const std::string& msg, long position = -1)
        : std::runtime_error(msg), pos(position) {}
};

// --- hash-consed constructors -----------------------------------------------
Formula top();
Formula bottom();
Formula prop(const std::string& p);
Formula neg_prop(const std::string& p);
Formula f_or(Formula a, Formula b);
Formula f_and(Formula a, Formula b);
Formula dia(Formula a);
Formula box(Formula a);
Formula mu(const std::string& x, Formula body);  // checks positivity of x
Formula nu(const std::string& x, Formula body);  // checks positivity of x

// --- basic queries -----------------------------------------------------------
const std::vector<std::string>& free_vars(Formula f);
std::set<std::string> bound_vars(Formula f);
bool is_tidy(Formula f);
bool is_literal(Formula f);   // Prop or NegProp
bool is_fixpoint(Formula f);  // Mu or Nu

// Fixed total order: by size, then kind, then letter/variable, then children.
int compare(Formula a, Formula b);
struct FormulaLess {
    bool operator()(Formula a, Formula b) const { return compare(a, b) < 0; }
};

// --- text --------------------------------------------------------------------
// Grammar: true false ident ~ident & | <> [] mu x. nu x. ( )
// precedence ~,<>,[] > & > |; binder scope extends maximally to the right.
// The parser renames binders where needed so results are tidy with pairwise
// distinct bound variables; unambiguous source names are kept as-is.
Formula parse(const std::string& text);
// Like parse, but keeps binder names exactly as written (no hygiene pass).
// Used when round-tripping machine-produced formulas, whose unfoldings may
// legitimately repeat binder names.
Formula parse_exact(const std::string& text);
std::string to_string(Formula f);

// --- algebra -----------------------------------------------------------------
Formula boolean_dual(Formula f);  // dual table; literals fixed pointwise
Formula negation(Formula f);      // dual, then swap p <-> ~p on free letters

// chi[xi/x]; requires no ~x in chi and FV(xi) disjoint from BV(chi).
Formula substitute(Formula chi, const std::string& x, Formula xi);
Formula unfold(Formula fixpoint);  // body[fixpoint/x]

std::vector<Formula> clos0(Formula f);
std::set<Formula, FormulaLess> closure(const std::vector<Formula>& seed);

bool is_guarded(Formula f);
Formula guard(Formula f);  // equivalent guarded formula (input must be AF)

// Alternation freeness. Checked jointly with the inductive Theta-fragment
// test; the two criteria must agree (they are asserted against each other in
// the unit tests, not here).
bool is_alternation_free(Formula f);          // direct Niwinski scoping test
enum class Eta : uint8_t { Mu, Nu };
// Membership of f in the noetherian eta-fragment over Q. `tokens` extends the
// test to formulas containing interpolation token variables: letters in
// `tokens` are treated like letters of Q for the "plain letter" clause.
bool theta_member(Formula f, Eta eta, const std::set<std::string>& q);

// --- traces ------------------------------------------------------------------
// Finite representation of an infinite trace: prefix then looping segment.
// Consecutive elements (including the wrap-around) must satisfy the Clos0
// successor relation ->_C.
struct TraceLasso {
    std::vector<Formula> prefix;
    std::vector<Formula> loop;  // non-empty
};
bool is_clos0_successor(Formula from, Formula to);
Eta classify_trace(const TraceLasso& t);  // Mu or Nu; throws if ill-formed

// Fresh-name helper shared with interpolation (token variables etc.):
// smallest "base", "base1", "base2", ... not contained in `used`.
std::string fresh_name(const std::string& base, const std::set<std::string>& used);

// Rename binders so the result is tidy with pairwise distinct bound
// variables, avoiding every name in `avoid` (in addition to the free vars).
Formula hygienic(Formula f, const std::set<std::string>& avoid = {});

}  // namespace afmc
