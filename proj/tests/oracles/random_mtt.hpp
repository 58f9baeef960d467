#pragma once

// Seeded generator of small valid nondeleting transducers with look-ahead.

#include <random>
#include <string>
#include <vector>

#include "mttlab/mtt.hpp"

namespace oracle {

struct RandomMttOptions {
    int max_states = 3;  // including the initial state
    int max_la = 2;
    int max_rank = 2;
    int max_calls = 2;  // per right-hand side
    int max_depth = 3;
    // Rejected when some output on inputs up to this size exceeds
    // output_cap nodes.
    std::size_t probe_size = 8;
    std::uint64_t output_cap = 4000;
};

class RandomMtt {
public:
    explicit RandomMtt(std::uint32_t seed, RandomMttOptions opt = {}) : rng_(seed), opt_(opt) {}

    // Keeps drawing until a candidate passes the filters.
    mttlab::Mtt next(const std::string& name) {
        for (;;) {
            mttlab::Mtt m = draw(name);
            if (acceptable(m)) return m;
        }
    }

private:
    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

    mttlab::Mtt draw(const std::string& name) {
        using namespace mttlab;
        RankedAlphabet in{{"f", 2}, {"g", 1}, {"a", 0}, {"b", 0}};
        RankedAlphabet out{{"h", 2}, {"k", 1}, {"c", 0}, {"d", 0}};
        int nla = uniform(1, opt_.max_la);
        std::vector<std::string> la_names;
        for (int p = 0; p < nla; ++p) la_names.push_back("p" + std::to_string(p));
        TreeAutomaton la(in, la_names);
        for (std::size_t s = 0; s < in.size(); ++s)
            for (auto& tuple : la.tuples(in[s].rank)) la.set(in[s].symbol, tuple, uniform(0, nla - 1));
        la.finish();

        Mtt m(name, in, out, la);
        int nstates = uniform(1, opt_.max_states);
        m.add_state("q0", 0);
        for (int q = 1; q < nstates; ++q) m.add_state("q" + std::to_string(q), uniform(0, opt_.max_rank));
        m.set_initial(0);
        for (int q = 0; q < nstates; ++q)
            for (std::size_t s = 0; s < in.size(); ++s)
                for (auto& tuple : la.tuples(in[s].rank)) {
                    calls_ = 0;
                    Tree rhs = gen(m, m.rank(q), in[s].rank, opt_.max_depth);
                    for (int j = 1; j <= m.rank(q); ++j) {
                        if (rhs.param_mask() & (std::uint64_t{1} << j)) continue;
                        Tree y = Tree::make(Symbol::param(j));
                        rhs = coin(0.5) ? Tree::make(Symbol::intern("h"), {rhs, y})
                                        : Tree::make(Symbol::intern("h"), {y, rhs});
                    }
                    m.put_rule(q, s, tuple, rhs);
                }
        return m;
    }

    mttlab::Tree gen(const mttlab::Mtt& m, int params, int vars, int depth) {
        using namespace mttlab;
        int choice = uniform(0, 9);
        bool can_call = vars > 0 && calls_ < opt_.max_calls;
        if (depth == 0 || choice < 3) {
            if (params > 0 && coin(0.6)) return Tree::make(Symbol::param(uniform(1, params)));
            if (can_call && coin(0.4)) return call(m, params, vars, 0);
            return Tree::leaf(coin(0.5) ? "c" : "d");
        }
        if (can_call && choice < 7) return call(m, params, vars, depth - 1);
        if (choice < 9) return Tree::make(Symbol::intern("h"), {gen(m, params, vars, depth - 1), gen(m, params, vars, depth - 1)});
        return Tree::make(Symbol::intern("k"), {gen(m, params, vars, depth - 1)});
    }

    mttlab::Tree call(const mttlab::Mtt& m, int params, int vars, int depth) {
        using namespace mttlab;
        ++calls_;
        int r = uniform(0, static_cast<int>(m.state_count()) - 1);
        std::vector<Tree> args;
        for (int j = 0; j < m.rank(r); ++j) {
            if (depth == 0) args.push_back(params > 0 ? Tree::make(Symbol::param(uniform(1, params))) : Tree::leaf("c"));
            else args.push_back(gen(m, params, vars, depth));
        }
        return Tree::make(Symbol::call(m.state_name(r), uniform(1, vars)), std::move(args));
    }

    bool acceptable(const mttlab::Mtt& m) {
        using namespace mttlab;
        if (!validate(m).ok()) return false;
        if (restrict_to_reachable_states(m).state_count() != m.state_count()) return false;
        auto nonempty = m.lookahead().nonempty_states();
        for (bool b : nonempty)
            if (!b) return false;
        Evaluator ev(m);
        for (const Tree& s : enumerate_trees(m.input(), opt_.probe_size))
            if (ev.apply(s).size() > opt_.output_cap) return false;
        return true;
    }

    std::mt19937 rng_;
    RandomMttOptions opt_;
    int calls_ = 0;
};

// The shared random part of the corpus.
inline std::vector<mttlab::Mtt> random_corpus(std::size_t count = 50, std::uint32_t seed = 20240607) {
    RandomMtt gen(seed);
    std::vector<mttlab::Mtt> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(gen.next("R" + std::to_string(i)));
    return out;
}

}  // namespace oracle
