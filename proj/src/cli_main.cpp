// Command-line front end: formula inspection, proving, proof checking,
// model checking, tableau construction and interpolation. Machine-readable
// JSON goes to stdout, human summaries to stderr.
//
// Exit codes: 0 = valid / true / OK, 1 = invalid / false / violations,
// 2 = input errors (parse failures, unguarded or alternating formulas,
// unreadable files).

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "formula.hpp"
#include "interpolation.hpp"
#include "proofs.hpp"
#include "prover.hpp"
#include "semantics.hpp"
#include "tableaux.hpp"

using nlohmann::json;
using namespace afmc;

namespace {

constexpr const char* kVersion = "afmc 1.0 (schema 1)";

Formula input_formula(const std::string& text, bool auto_guard) {
    Formula f = parse(text);
    if (!is_alternation_free(f))
        throw std::invalid_argument("formula is not alternation-free: " + text);
    if (auto_guard) f = guard(f);
    if (!is_guarded(f))
        throw std::invalid_argument("formula is not guarded (try --auto-guard): " +
                                    text);
    return f;
}

Sequent input_sequent(const std::vector<std::string>& exprs, bool auto_guard) {
    Sequent s;
    for (const auto& e : exprs) s.insert(input_formula(e, auto_guard));
    return s;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read " + path);
    return json::parse(in);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write " + path);
    out << text;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

int cmd_check_formula(const std::string& expr) {
    Formula f = parse(expr);
    json out;
    out["formula"] = to_string(f);
    out["guarded"] = is_guarded(f);
    out["alternation_free"] = is_alternation_free(f);
    out["closure_size"] = closure({f}).size();
    out["fv"] = free_vars(f);
    out["bv"] = bound_vars(f);
    emit(out);
    return 0;
}

int cmd_prove(const std::vector<std::string>& exprs, bool auto_guard,
              const std::string& proof_path, const std::string& latex_path) {
    Sequent s = input_sequent(exprs, auto_guard);
    auto r = decide(s);
    json out;
    out["verdict"] = r.valid ? "valid" : "invalid";
    if (r.valid) {
        out["proof_nodes"] = r.proof.nodes.size();
        if (!proof_path.empty())
            write_file(proof_path, proof_to_json(r.proof).dump(2) + "\n");
        if (!latex_path.empty()) write_file(latex_path, proof_to_latex(r.proof));
        std::cerr << "VALID (" << r.proof.nodes.size() << " proof nodes)\n";
    } else {
        out["countermodel"] = model_to_json(r.model);
        out["world"] = r.world;
        std::cerr << "INVALID (countermodel with " << r.model.worlds.size()
                  << " worlds, falsified at " << r.world << ")\n";
    }
    emit(out);
    return r.valid ? 0 : 1;
}

int cmd_check_proof(const std::string& path) {
    Proof p = proof_from_json(load_json(path));
    auto violations = check_proof(p);
    json out;
    out["ok"] = violations.empty();
    json vs = json::array();
    for (const auto& v : violations)
        vs.push_back({{"node", v.node},
                      {"condition", v.condition},
                      {"message", v.message}});
    out["violations"] = vs;
    emit(out);
    if (violations.empty()) {
        std::cerr << "OK (" << p.nodes.size() << " nodes)\n";
        return 0;
    }
    std::cerr << violations.size() << " violation(s)\n";
    return 1;
}

int cmd_model_check(const std::string& model_path, const std::string& world,
                    const std::string& expr, bool auto_guard) {
    KripkeModel m = model_from_json(load_json(model_path));
    Formula f = parse(expr);
    if (auto_guard) f = guard(f);
    if (m.world_index(world) < 0)
        throw std::invalid_argument("unknown world: " + world);
    bool value = model_check(f, m, world);
    json out;
    out["value"] = value;
    out["world"] = world;
    out["formula"] = to_string(f);
    emit(out);
    std::cerr << (value ? "true" : "false") << "\n";
    return value ? 0 : 1;
}

int cmd_tableau(const std::vector<std::string>& exprs, bool auto_guard,
                const std::string& dump_path) {
    Sequent s = input_sequent(exprs, auto_guard);
    Tableau t = build_tableau(s);
    auto ts = solve_tableau(t);
    json out;
    out["winner"] = ts.winner == Player::Exists ? "prover" : "refuter";
    out["tableau_nodes"] = t.nodes.size();
    out["game_positions"] = ts.game.arena.n;
    if (!dump_path.empty())
        write_file(dump_path, tableau_to_json(t).dump(2) + "\n");
    emit(out);
    std::cerr << "winner: " << out["winner"].get<std::string>() << "\n";
    return ts.winner == Player::Exists ? 0 : 1;
}

int cmd_interpolate(const std::string& phi_text, const std::string& psi_text,
                    bool auto_guard, bool raw) {
    Formula phi = input_formula(phi_text, auto_guard);
    Formula psi = input_formula(psi_text, auto_guard);
    try {
        auto d = interpolate_detail(phi, psi);
        json out;
        out["interpolant"] = to_string(raw ? d.theta : d.simplified);
        out["raw"] = to_string(d.theta);
        out["simplified"] = to_string(d.simplified);
        out["colouring"] = {{"mu", d.mu_nodes},
                            {"nu", d.nu_nodes},
                            {"transparent", d.check_nodes}};
        out["left_valid"] = d.left_valid;
        out["right_valid"] = d.right_valid;
        emit(out);
        std::cerr << "interpolant: " << out["interpolant"].get<std::string>()
                  << "\n";
        return d.left_valid && d.right_valid ? 0 : 1;
    } catch (const InvalidImplication& e) {
        json out;
        out["verdict"] = "implication-invalid";
        out["countermodel"] = model_to_json(e.model);
        out["world"] = e.world;
        emit(out);
        std::cerr << "the implication is not valid\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"alternation-free modal mu-calculus: proofs, tableaux, games, "
                 "model checking and Craig interpolation"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    bool auto_guard = false;
    app.add_flag("--auto-guard", auto_guard,
                 "replace input formulas by equivalent guarded ones");

    std::string expr;
    auto* cf = app.add_subcommand("check-formula",
                                  "parse a formula and report its properties");
    cf->add_option("expr", expr, "formula text")->required();

    std::vector<std::string> exprs;
    std::string proof_path, latex_path;
    auto* pv = app.add_subcommand("prove", "decide the disjunction of a sequent");
    pv->add_option("expr", exprs, "sequent members")->required();
    pv->add_option("--proof", proof_path, "write the proof as JSON");
    pv->add_option("--latex", latex_path, "write the proof as LaTeX");

    std::string proof_file;
    auto* cp = app.add_subcommand("check-proof", "check a proof file");
    cp->add_option("proof", proof_file, "proof JSON file")->required();

    std::string model_path, world, mc_expr;
    auto* mc = app.add_subcommand("model-check",
                                  "evaluate a formula at a world of a model");
    mc->add_option("model", model_path, "model JSON file")->required();
    mc->add_option("world", world, "world name")->required();
    mc->add_option("expr", mc_expr, "formula text")->required();

    std::vector<std::string> tab_exprs;
    std::string dump_path;
    auto* tb = app.add_subcommand("tableau",
                                  "build the tableau and solve its game");
    tb->add_option("expr", tab_exprs, "sequent members")->required();
    tb->add_option("--dump", dump_path, "write the tableau as JSON");

    std::string phi_text, psi_text;
    bool raw = false;
    auto* ip = app.add_subcommand("interpolate",
                                  "Craig interpolant for phi -> psi");
    ip->add_option("phi", phi_text, "antecedent")->required();
    ip->add_option("psi", psi_text, "consequent")->required();
    ip->add_flag("--raw", raw, "report the unsimplified interpolant");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*cf) return cmd_check_formula(expr);
        if (*pv) return cmd_prove(exprs, auto_guard, proof_path, latex_path);
        if (*cp) return cmd_check_proof(proof_file);
        if (*mc) return cmd_model_check(model_path, world, mc_expr, auto_guard);
        if (*tb) return cmd_tableau(tab_exprs, auto_guard, dump_path);
        if (*ip) return cmd_interpolate(phi_text, psi_text, auto_guard, raw);
    } catch (const FormulaError& e) {
        std::cerr << "error: " << e.what();
        if (e.pos >= 0) std::cerr << " (at position " << e.pos << ")";
        std::cerr << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
