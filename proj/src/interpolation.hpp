// Craig interpolation from partitioned cyclic proofs: propagating a split of
// the root sequent through every rule, balancing a proof so discharged
// leaves split like their companions, colouring discharge cycles with a
// fixpoint type, and reading off the interpolant bottom-up.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "proofs.hpp"
#include "prover.hpp"

namespace afmc {

// Per-node split of each sequent into a left and a right part
// (left ∪ right = sequent, left ∩ right = ∅).
struct NodewisePartition {
    std::vector<AnnotatedSequent> left, right;
};

// Propagates the root split (gl | gr) top-down through every rule: context
// formulas keep their side, formulas produced by a rule go to the side of
// the principal (for the box rule, each stripped diamond goes to its own
// diamond's side, with the box's body winning collisions). The result is the
// unique split of the whole proof coherent with every rule application.
NodewisePartition induce_partition(const Proof& p, const AnnotatedSequent& gl,
                                   const AnnotatedSequent& gr);

// A partition is balanced when every discharged leaf carries the same split
// as its companion.
bool is_balanced(const Proof& p, const NodewisePartition& np);

// Unravels the proof while propagating the split and re-discharges each
// branch at the first ancestor with the same (sequent, split) pair that
// satisfies the cycle conditions (no F/U below it, a box rule on the
// segment, focus throughout). Rejects proofs containing a discharge node
// that discharges no leaf.
std::pair<Proof, NodewisePartition> balance(const Proof& p,
                                            const NodewisePartition& np);

// Equivalence classes of the relation "share some companion-to-leaf
// interval" (reflexive-transitive closure); -1 for nodes on no interval.
std::vector<int> connectedness_classes(const Proof& p);

enum class FixColour { Mu, Nu, Check };

// Per class: μ when every member's left part has a focused formula, else ν
// (then every member's right part must have one); nodes on no interval get ✓.
// Throws std::invalid_argument when a class has neither side uniformly
// focused (only possible on unbalanced input).
std::vector<FixColour> fixpoint_colouring(const Proof& p,
                                          const NodewisePartition& np);

// Negation that fixes the variables in `tokens` instead of failing on them;
// equals negation() exactly when no token occurs free.
Formula simple_negation(Formula f, const std::set<std::string>& tokens = {});

// The interpolant read off bottom-up: discharged leaves become their
// companion's token variable, companions bind it with their colour's
// fixpoint, and every other node applies its rule's basic formula to the
// child interpolants. Token variables are renamed apart from all letters
// appearing in the proof. Free-variable and fragment invariants are checked
// at every node.
Formula interpolant(const Proof& p, const NodewisePartition& np,
                    const std::vector<FixColour>& colour);

// Bottom-up application of the identities ⊥∨α ≡ α, α∨⊥ ≡ α, ⊤∧α ≡ α,
// α∧⊤ ≡ α, ◇⊥ ≡ ⊥ and □⊤ ≡ ⊤.
Formula simplify_interpolant(Formula f);

// Thrown by interpolate when φ → ψ is not valid; carries the countermodel.
struct InvalidImplication : std::runtime_error {
    KripkeModel model;
    std::string world;
    InvalidImplication(KripkeModel m, std::string w)
        : std::runtime_error("implication is not valid"),
          model(std::move(m)),
          world(std::move(w)) {}
};

struct InterpolateDetail {
    Formula theta;       // as constructed
    Formula simplified;  // after simplify_interpolant
    int mu_nodes = 0, nu_nodes = 0, check_nodes = 0;
    bool left_valid = false;   // decide({¬φ, θ})
    bool right_valid = false;  // decide({¬θ, ψ})
};

// Full pipeline for guarded alternation-free φ, ψ: proves ¬φ, ψ, splits it
// ¬φ | ψ, balances, colours, reads off θ, and verifies the three interpolant
// guarantees (vocabulary, alternation freeness, both implications re-proved).
InterpolateDetail interpolate_detail(Formula phi, Formula psi);
Formula interpolate(Formula phi, Formula psi);

}  // namespace afmc
