// Graph tableaux for guarded alternation-free sequents, trail machinery, the
// tableau game (Prover vs Refuter) solved via a deterministic focus-powerset
// tracker, and countermodel extraction from Refuter strategies.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "formula.hpp"
#include "games.hpp"
#include "semantics.hpp"

#include "json.hpp"

namespace afmc {

using Sequent = std::set<Formula, FormulaLess>;

enum class TRule { Ax1, Ax2, ROr, RAnd, M, RMu, RNu };
const char* trule_name(TRule r);

// Which boolean/fixpoint principal to decompose first at each sequent.
enum class Schedule { LeastFirst, GreatestFirst };

struct TableauNode {
    Sequent seq;
    TRule rule;
    Formula principal = nullptr;  // set for ROr, RAnd, RMu, RNu
    std::vector<int> succs;       // deduplicated premise nodes
};

// Graph tableau keyed by sequent: with a fixed schedule the applied rule is a
// function of the sequent, so identical sequents share a node.
struct Tableau {
    std::vector<TableauNode> nodes;
    int initial = 0;
};

// Saturates Φ into a finite graph tableau. Rule policy: Ax2, then Ax1, then
// the scheduled boolean/fixpoint principal, then the modal rule (whose side
// condition — literal context, locally falsifiable — holds exactly when
// nothing else applies). Rejects empty, unguarded or non-alternation-free
// input.
Tableau build_tableau(const Sequent& phi, Schedule s = Schedule::LeastFirst);

nlohmann::json tableau_to_json(const Tableau& t);

// ---------------------------------------------------------------------------
// Trails
// ---------------------------------------------------------------------------

struct TabTrail {
    std::vector<std::pair<Formula, Formula>> active, passive;
};

// Active/passive trail relation along the edge from u to its successor v.
TabTrail tableau_trail_step(const Tableau& t, int u, int v);

struct TightTrail {
    std::vector<Formula> steps;
};

// Removes the targets of passive steps from a trail riding `path`.
// `trail[i]` lives in the sequent of `path[i]`.
TightTrail tighten(const Tableau& t, const std::vector<int>& path,
                   const std::vector<Formula>& trail);

// `path`/`trail` describe a lasso: entries from `loop_start` onward repeat
// forever, with a wrap edge path.back() -> path[loop_start] and wrap trail
// step trail.back() -> trail[loop_start]. True iff the tightening loops on a
// ν-trace.
bool is_nu_trail(const Tableau& t, const std::vector<int>& path, int loop_start,
                 const std::vector<Formula>& trail);

// ---------------------------------------------------------------------------
// The tableau game
// ---------------------------------------------------------------------------

// Product of the tableau with the focus tracker: a position carries the set
// of formulas whose trails since the last reset avoid μ-unfolding steps.
// When the set empties, it resets to the full sequent and the position is
// marked; Prover (= Exists) wins iff marks occur finitely often (co-Büchi).
struct TableauGame {
    GameArena arena;
    std::vector<int> pos_node;        // tableau node per position
    std::vector<Sequent> pos_focus;
    std::vector<bool> pos_reset;
    std::map<std::tuple<int, std::vector<Formula>, bool>, int> index;

    int find(int node, const Sequent& focus, bool reset) const;
};

TableauGame tableau_game(const Tableau& t);

struct TableauSolution {
    TableauGame game;
    Solution sol;     // winners and positional strategies on the product
    Player winner;    // at the root; Exists = Prover
};

TableauSolution solve_tableau(const Tableau& t);

// ---------------------------------------------------------------------------
// Countermodels
// ---------------------------------------------------------------------------

struct Countermodel {
    KripkeModel model;
    std::string world;  // designated world refuting the root sequent
};

// States are the entry positions (root, and modal-rule successors) of
// Refuter's strategy subgraph; each state's in-state path is forced except at
// R∧, where Refuter's strategy decides. Throws std::invalid_argument when
// Refuter does not win the root or the strategy fails verification.
Countermodel extract_countermodel(const Tableau& t, const TableauGame& g,
                                  const Solution& sol);

}  // namespace afmc
