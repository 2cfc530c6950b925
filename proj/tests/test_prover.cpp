#include "prover.hpp"

#include <algorithm>
#include <random>

#include "doctest.h"
#include "gen.hpp"

using namespace afmc;
using afmc::gen::FormulaGen;
using afmc::gen::for_each_model;

namespace {

Sequent seq(std::initializer_list<const char*> fs) {
    Sequent s;
    for (const char* f : fs) s.insert(parse(f));
    return s;
}

Formula disjoin(const Sequent& phi) {
    Formula out = nullptr;
    for (Formula f : phi) out = out ? f_or(out, f) : f;
    return out;
}

// All proof-side guarantees a Valid answer must satisfy.
void check_valid_proof(const Sequent& phi, const Proof& pr) {
    REQUIRE(!pr.nodes.empty());
    AnnotatedSequent root;
    for (Formula f : phi) root.insert(focused(f));
    CHECK(pr.nodes[0].seq == root);
    CHECK(check_proof(pr).empty());
    CHECK(is_thin_proof(pr));
    CHECK(is_progressive(pr));
    for (int d = 0; d <= 3; ++d)
        CHECK(check_proof(unravel_prefix(pr, d), true).empty());
}

// Searches all models with <= max_worlds worlds over the free letters for a
// world falsifying every member of phi; empty result = none found.
bool desk_falsifiable(const Sequent& phi, int max_worlds) {
    std::set<std::string> letters;
    for (Formula f : phi)
        for (const auto& p : free_vars(f)) letters.insert(p);
    std::vector<std::string> ls(letters.begin(), letters.end());
    bool found = false;
    for (int n = 1; n <= max_worlds && !found; ++n) {
        for_each_model(n, ls, [&](const KripkeModel& m) {
            for (size_t w = 0; w < m.worlds.size(); ++w) {
                bool all_false = true;
                for (Formula f : phi)
                    if (denote(f, m)[w]) { all_false = false; break; }
                if (all_false) { found = true; return false; }
            }
            return true;
        });
    }
    return found;
}

}  // namespace

TEST_CASE("complementary literals close with a single axiom node") {
    auto r = decide(seq({"p", "~p"}));
    REQUIRE(r.valid);
    CHECK(r.proof.nodes.size() == 1);
    CHECK(r.proof.nodes[0].rule == Rule::Ax1);
    check_valid_proof(seq({"p", "~p"}), r.proof);
}

TEST_CASE("truth closes immediately") {
    auto r = decide(seq({"true"}));
    REQUIRE(r.valid);
    CHECK(r.proof.nodes.size() == 1);
    CHECK(r.proof.nodes[0].rule == Rule::Ax2);
    check_valid_proof(seq({"true"}), r.proof);
}

TEST_CASE("weakening before an axiom") {
    Sequent phi = seq({"true", "<>p"});
    auto r = decide(phi);
    REQUIRE(r.valid);
    // The diamond is weakened away, then the truth axiom closes.
    CHECK(r.proof.nodes.size() == 2);
    CHECK(r.proof.nodes[0].rule == Rule::W);
    CHECK(r.proof.nodes[1].rule == Rule::Ax2);
    check_valid_proof(phi, r.proof);
}

TEST_CASE("nu x. [] x is proved by a discharged cycle") {
    Sequent phi = seq({"nu x. [] x"});
    auto r = decide(phi);
    REQUIRE(r.valid);
    check_valid_proof(phi, r.proof);
    int d = 0, tok = 0, bx = 0;
    for (const auto& n : r.proof.nodes) {
        d += n.rule == Rule::D;
        tok += n.rule == Rule::Tok;
        bx += n.rule == Rule::RBox;
    }
    CHECK(d == 1);
    CHECK(tok == 1);
    CHECK(bx == 1);
    CHECK(r.proof.nodes.size() <= 6);
    // The root stays focused, so no total focus chain appears.
    for (const auto& n : r.proof.nodes) CHECK(n.rule != Rule::F);
}

TEST_CASE("mu x. <> x is refuted by a successor-free world") {
    Sequent phi = seq({"mu x. <> x"});
    auto r = decide(phi);
    REQUIRE(!r.valid);
    CHECK(r.model.worlds.size() == 1);
    CHECK(r.model.rel[0].empty());
    for (Formula f : phi) CHECK(!denote(f, r.model)[r.model.world_index(r.world)]);
}

TEST_CASE("a bare letter is refuted") {
    auto r = decide(seq({"p"}));
    REQUIRE(!r.valid);
    CHECK(!denote(parse("p"), r.model)[r.model.world_index(r.world)]);
}

TEST_CASE("precondition failures throw") {
    CHECK_THROWS_AS(decide(Sequent{}), std::invalid_argument);
    CHECK_THROWS_AS(decide(seq({"mu x. x | p"})), std::invalid_argument);
    CHECK_THROWS_AS(decide(seq({"mu x. (nu y. [](x | y)) | <>x"})),
                    std::invalid_argument);
}

TEST_CASE("excluded middle across random formulas") {
    std::mt19937 rng(20260826);
    FormulaGen gen{rng};
    for (int i = 0; i < 40; ++i) {
        Formula f = guard(gen(3));
        Sequent phi{f, negation(f)};
        auto r = decide(phi);
        CHECK(r.valid);
        if (r.valid) check_valid_proof(phi, r.proof);
    }
}

TEST_CASE("soundness and completeness at desk scale") {
    std::mt19937 rng(97);
    FormulaGen gen{rng};
    int valid = 0, invalid = 0;
    for (int i = 0; i < 120; ++i) {
        Formula f = guard(gen(3));
        Sequent phi{f};
        auto r = decide(phi);
        if (r.valid) {
            ++valid;
            check_valid_proof(phi, r.proof);
            CHECK(!desk_falsifiable(phi, 3));
        } else {
            ++invalid;
            size_t w = r.model.world_index(r.world);
            for (Formula g : phi) CHECK(!denote(g, r.model)[w]);
        }
    }
    CHECK(valid > 5);
    CHECK(invalid > 5);
}

TEST_CASE("multi-formula sequents and focus resets") {
    // Validity that needs interplay between members of the sequent.
    std::vector<Sequent> valids = {
        seq({"~p | ~q", "p & q"}),
        seq({"nu x. p & [] x", "mu y. ~p | <> y"}),
        seq({"[] ~p", "<> p", "q"}),
        seq({"nu x. <>x | []x"}),
        seq({"mu x. p | <>x", "nu y. ~p & []y"}),
    };
    for (const auto& phi : valids) {
        auto r = decide(phi);
        CHECK_MESSAGE(r.valid, to_string(disjoin(phi)));
        if (r.valid) {
            check_valid_proof(phi, r.proof);
            CHECK(!desk_falsifiable(phi, 3));
        }
    }
}

TEST_CASE("invalid sequents with countermodels needing several worlds") {
    std::vector<Sequent> invalids = {
        seq({"nu x. p & [] x"}),
        seq({"mu x. p | <> x"}),
        seq({"[] p", "[] ~p"}),
        seq({"<> true"}),
    };
    for (const auto& phi : invalids) {
        auto r = decide(phi);
        CHECK_MESSAGE(!r.valid, to_string(disjoin(phi)));
        if (!r.valid) {
            size_t w = r.model.world_index(r.world);
            for (Formula g : phi) CHECK(!denote(g, r.model)[w]);
        }
    }
}

TEST_CASE("decide is deterministic") {
    std::mt19937 rng(4242);
    FormulaGen gen{rng};
    for (int i = 0; i < 20; ++i) {
        Formula f = guard(gen(3));
        Sequent phi{f, gen(2)};
        Sequent guarded;
        for (Formula g : phi) guarded.insert(guard(g));
        auto a = decide(guarded);
        auto b = decide(guarded);
        CHECK(a.valid == b.valid);
        if (a.valid) {
            CHECK(proof_to_json(a.proof) == proof_to_json(b.proof));
        } else {
            CHECK(model_to_json(a.model) == model_to_json(b.model));
            CHECK(a.world == b.world);
        }
    }
}

TEST_CASE("schedule choice never changes the verdict") {
    std::mt19937 rng(777);
    FormulaGen gen{rng};
    for (int i = 0; i < 30; ++i) {
        Formula f = guard(gen(3));
        auto a = decide(Sequent{f}, Schedule::LeastFirst);
        auto b = decide(Sequent{f}, Schedule::GreatestFirst);
        CHECK(a.valid == b.valid);
        if (a.valid) check_valid_proof(Sequent{f}, b.proof);
    }
}
