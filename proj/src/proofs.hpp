// Annotated sequents, the Focus rule set, cyclic proofs with discharge
// tokens, the proof checker, trail relations, and the thinning /
// backwards-closure / simulation machinery.
#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "formula.hpp"

#include "json.hpp"

namespace afmc {

// Annotations on sequent formulas: u (unfocused) ⊏ f (focused).
enum class Ann { U, F };

struct AnnForm {
    Formula f;
    Ann a;
    bool operator==(const AnnForm&) const = default;
    bool operator<(const AnnForm& o) const {
        FormulaLess less;
        if (less(f, o.f)) return true;
        if (less(o.f, f)) return false;
        return a < o.a;
    }
};

// Sequents are finite sets of annotated formulas.
using AnnotatedSequent = std::set<AnnForm>;

inline AnnForm focused(Formula f) { return {f, Ann::F}; }
inline AnnForm unfocused(Formula f) { return {f, Ann::U}; }

bool is_thin(const AnnotatedSequent& s);
AnnotatedSequent thinning(const AnnotatedSequent& s);

// Γ ⊑_F Σ: every φ^a in Γ occurs in Σ with an annotation b ⊒ a.
bool more_focus(const AnnotatedSequent& gamma, const AnnotatedSequent& sigma);

// Least fixpoint of Γ ↦ Σ ∪ Q₀(Γ), restricted to closure(Σ) × {u,f}.
std::set<AnnForm> backwards_closure(const AnnotatedSequent& sigma);

// γ ⊆ Q(σ), computed over a universe large enough to contain γ.
bool q_covers(const AnnotatedSequent& gamma, const AnnotatedSequent& sigma);

// ---------------------------------------------------------------------------
// Rules and proofs
// ---------------------------------------------------------------------------

enum class Rule {
    Ax1, Ax2, ROr, RAnd, RBox, RMu, RNu, W, F, U,
    D,     // discharge rule, carries a token
    Tok,   // discharged leaf, carries a token and a companion
    Star,  // open assumption
};

const char* rule_name(Rule r);
std::optional<Rule> rule_from_name(const std::string& name);

struct ProofNode {
    AnnotatedSequent seq;
    Rule rule = Rule::Star;
    int parent = -1;                 // -1 at the root
    std::vector<int> children;       // derived, in premise order
    int companion = -1;              // for Tok leaves
    std::string token;               // for D and Tok
};

struct Proof {
    std::vector<ProofNode> nodes;  // preorder, nodes[0] is the root

    int add(ProofNode n);          // appends and wires the parent's child list
    void relink();                 // recompute children from parents
};

// Premises of a rule applied to `conclusion` with the given principal
// formula. `retain` keeps the principal in the context (legal because
// sequents are sets). Throws std::invalid_argument naming the failed side
// condition when the rule does not apply.
std::vector<AnnotatedSequent> apply_rule(Rule r, const AnnotatedSequent& conclusion,
                                         std::optional<AnnForm> principal = {},
                                         bool retain = false);

// A concrete reading of the rule application at a node: the principal
// formula, whether it was retained in the context, and which premise of
// apply_rule each child matches. Empty when no reading fits.
struct RuleInstance {
    Rule rule;
    std::optional<AnnForm> principal;
    bool retain = false;
    std::vector<int> premise_of_child;  // child i matches premise premise_of_child[i]
};
std::optional<RuleInstance> rule_instance(const Proof& p, int node);

struct Violation {
    int node;
    std::string condition;  // "C1", "C2", "C3", "C4a", "C4b", "C4c", "open"
    std::string message;
};

// Checks Def. of Focus proofs: local rule matching (C1), token/star leaves
// (C2), discharge bookkeeping (C3), and the companion-to-leaf path conditions
// (C4a no F/U, C4b at least one R□, C4c focus throughout). With
// allow_assumptions, ⋆ leaves are permitted; otherwise they are "open"
// violations.
std::vector<Violation> check_proof(const Proof& p, bool allow_assumptions = false);

// A proof is thin when every non-thin sequent is immediately repaired by
// weakening one of its unfocused duplicates.
bool is_thin_proof(const Proof& p);
// Progressive: boolean and fixpoint rules drop their principal formula.
bool is_progressive(const Proof& p);

// ---------------------------------------------------------------------------
// Trails
// ---------------------------------------------------------------------------

struct TrailRel {
    std::vector<std::pair<AnnForm, AnnForm>> active, passive;
};

// Trail relation along the edge from `node` to its child `child_index`.
TrailRel edge_trails(const Proof& p, int node, int child_index);

// Composed general trail relation along a root-to-descendant path of nodes.
std::vector<std::pair<AnnForm, AnnForm>> proof_trails(const Proof& p,
                                                      const std::vector<int>& path);

// `loop` lists the nodes of a cycle: consecutive entries are parent→child
// edges, and a Tok leaf steps back to its companion (an identity trail step,
// like the D node itself). Returns true iff some trail around the loop avoids
// μ-formulas, i.e. tightens to a ν-trace.
bool nu_trail_exists(const Proof& p, const std::vector<int>& loop);

// ---------------------------------------------------------------------------
// Simulation and unraveling
// ---------------------------------------------------------------------------

// `basic` is a one-rule proof (root + ⋆ premises). Builds the thin,
// progressive simulation proving gamma_p (which must satisfy
// Σ_root ⊆ backwards_closure(gamma_p)); its open assumptions Δ' each cover a
// premise Δ of the input via Δ ⊆ backwards_closure(Δ').
Proof simulate_basic_step(const Proof& basic, const AnnotatedSequent& gamma_p);

// Finite prefix of the infinite unraveling: D and Tok nodes are spliced out;
// each branch follows back edges at most `depth` times, then truncates with
// a ⋆ leaf.
Proof unravel_prefix(const Proof& p, int depth);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

// {"nodes":[{"seq":[["p","f"],…],"rule":"RBox","parent":0,
//            "companion":null,"token":null},…]}
nlohmann::json proof_to_json(const Proof& p);
Proof proof_from_json(const nlohmann::json& j);

// bussproofs rendering (best effort).
std::string proof_to_latex(const Proof& p);

std::string to_string(const AnnotatedSequent& s);

}  // namespace afmc
