// Random generators for formulas and small Kripke models shared by the test
// binaries.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "../src/formula.hpp"
#include "../src/semantics.hpp"

namespace afmc::gen {

struct FormulaGen {
    std::mt19937& rng;
    std::vector<std::string> letters{"p", "q"};
    int next_var = 0;

    int pick(int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    }

    // Tidy, positive, alternation-free formula. Binders get fresh names, so
    // tidiness and pairwise-distinct binders hold by construction; bound
    // variables only ever occur positively. Drafts where a bound variable
    // crosses a binder of the opposite kind are redrawn.
    Formula operator()(int depth) {
        for (;;) {
            Formula f = draft(depth, {});
            if (is_alternation_free(f)) return f;
        }
    }

    Formula draft(int depth, std::vector<std::string> scope) {
        if (depth <= 0) {
            switch (pick(0, 3 + (scope.empty() ? 0 : 2))) {
                case 0: return top();
                case 1: return bottom();
                case 2: return prop(letters[pick(0, int(letters.size()) - 1)]);
                case 3: return neg_prop(letters[pick(0, int(letters.size()) - 1)]);
                default: return prop(scope[pick(0, int(scope.size()) - 1)]);
            }
        }
        switch (pick(0, 5)) {
            case 0: return f_or(draft(depth - 1, scope), draft(depth - 1, scope));
            case 1: return f_and(draft(depth - 1, scope), draft(depth - 1, scope));
            case 2: return dia(draft(depth - 1, scope));
            case 3: return box(draft(depth - 1, scope));
            default: {
                std::string x = "v" + std::to_string(next_var++);
                scope.push_back(x);
                Formula body = draft(depth - 1, scope);
                // keep the binder non-vacuous more often than not
                if (pick(0, 2) != 0) body = f_or(body, prop(x));
                return pick(0, 1) == 0 ? mu(x, body) : nu(x, body);
            }
        }
    }
};

inline KripkeModel random_model(std::mt19937& rng, int max_worlds = 4,
                                std::vector<std::string> letters = {"p", "q"}) {
    std::uniform_int_distribution<int> nd(1, max_worlds);
    int n = nd(rng);
    KripkeModel m;
    for (int i = 0; i < n; ++i) m.worlds.push_back("s" + std::to_string(i));
    m.rel.resize(n);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t)
            if (coin(rng)) m.rel[s].push_back(t);
    for (const auto& p : letters) {
        WorldSet ws(n, false);
        for (int s = 0; s < n; ++s) ws[s] = coin(rng) == 1;
        m.val[p] = ws;
    }
    return m;
}

// Enumerate every model with `n` worlds over `letters` — feasible for n ≤ 3.
// Visits each combination of relation (n² bits) and valuations (n bits per
// letter) exactly once via the callback; returns false early if the callback
// does.
template <typename Fn>
bool for_each_model(int n, const std::vector<std::string>& letters, Fn&& fn) {
    KripkeModel m;
    for (int i = 0; i < n; ++i) m.worlds.push_back("s" + std::to_string(i));
    int rel_bits = n * n, val_bits = n * int(letters.size());
    for (uint64_t r = 0; r < (uint64_t(1) << rel_bits); ++r) {
        m.rel.assign(n, {});
        for (int s = 0; s < n; ++s)
            for (int t = 0; t < n; ++t)
                if (r >> (s * n + t) & 1) m.rel[s].push_back(t);
        for (uint64_t v = 0; v < (uint64_t(1) << val_bits); ++v) {
            m.val.clear();
            for (size_t li = 0; li < letters.size(); ++li) {
                WorldSet ws(n, false);
                for (int s = 0; s < n; ++s)
                    ws[s] = v >> (li * n + s) & 1;
                m.val[letters[li]] = ws;
            }
            if (!fn(const_cast<const KripkeModel&>(m))) return false;
        }
    }
    return true;
}

}  // namespace afmc::gen
