// The decision procedure: solve the tableau game with focus tracking; on a
// Prover win synthesize a finite cyclic annotated proof, on a Refuter win
// emit a countermodel.
#pragma once

#include "proofs.hpp"
#include "tableaux.hpp"

namespace afmc {

struct DecideResult {
    bool valid = false;
    Proof proof;         // set when valid; root sequent is Φ^f
    KripkeModel model;   // set when invalid
    std::string world;   // designated world falsifying every formula of Φ
};

// Φ must be non-empty with every formula guarded and alternation-free
// (callers may pre-apply guard()).
DecideResult decide(const Sequent& phi, Schedule sched = Schedule::LeastFirst);

// Builds the cyclic proof along Prover's positional strategy on the
// focus-tracked product: each tableau rule is simulated by its counterpart
// rule, a total-focus chain of F applications fires exactly at reset
// positions, premises are thin-normalized by weakening unfocused duplicates,
// the modal rule weakens down to the strategy's chosen box plus the
// diamonds, and a branch is discharged at the first product position
// repeated along it (such cycles contain a box rule, stay focused and avoid
// F/U because winning strategies admit no reset on a cycle). Throws
// std::invalid_argument when Prover does not win the root.
Proof strategy_to_cyclic_proof(const Tableau& t, const TableauGame& g,
                               const Solution& sol);

}  // namespace afmc
