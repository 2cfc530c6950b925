// Kripke models, denotational fixpoint semantics, the evaluation game, and
// cross-checked model checking.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "formula.hpp"
#include "games.hpp"

#include "json.hpp"

namespace afmc {

// World sets are bit vectors indexed by position in KripkeModel::worlds.
using WorldSet = std::vector<bool>;

struct KripkeModel {
    std::vector<std::string> worlds;          // world names, index = id
    std::vector<std::vector<int>> rel;        // successor lists per world
    std::map<std::string, WorldSet> val;      // letter -> worlds where true

    int world_index(const std::string& name) const;  // -1 if absent
    void validate() const;
};

// JSON format: {"worlds":["s0",...], "rel":[["s0","s1"],...],
//               "val":{"p":["s0",...], ...}}.
// Letters missing from "val" are false everywhere.
KripkeModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const KripkeModel& m);

// Extension of φ in m. Free letters without a valuation read as ∅; fixpoints
// by Knaster–Tarski iteration (at most |worlds| rounds each).
WorldSet denote(Formula f, const KripkeModel& m);

// The evaluation game: positions are closure(ξ) × worlds, with a weak
// condition (priorities constant per SCC, keyed by the fixpoint kind
// regenerating in that SCC). ξ must be alternation-free; the weak encoding
// would be unsound otherwise.
struct EvalGame {
    GameArena arena;
    std::vector<Formula> pos_formula;  // per position
    std::vector<int> pos_world;
    int index(Formula f, int world) const;  // -1 if absent
};
EvalGame evaluation_game(Formula xi, const KripkeModel& m);

// True iff w ∈ ⟦φ⟧, computed both denotationally and via the evaluation game
// (on guard(φ) when φ is unguarded); a disagreement throws std::logic_error.
bool model_check(Formula f, const KripkeModel& m, int world);
bool model_check(Formula f, const KripkeModel& m, const std::string& world);

}  // namespace afmc
