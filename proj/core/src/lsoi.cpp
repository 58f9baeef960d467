#include "mttlab/lsoi.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <set>

namespace mttlab {

namespace {

std::string fresh(const std::string& base, const std::function<bool(const std::string&)>& taken) {
    std::string name = base;
    while (taken(name)) name += "'";
    return name;
}

std::vector<Tree> param_list(int n) {
    std::vector<Tree> out;
    for (int j = 1; j <= n; ++j) out.push_back(Tree::make(Symbol::param(j)));
    return out;
}

}  // namespace

Mtt build_gadget(const Mtt& m1, const Mtt& m2, GadgetNames* names) {
    if (!(m1.input() == m2.input()) || !(m1.output() == m2.output()))
        throw Error(ErrorCode::alphabet_mismatch, "the transducers must share input and output alphabets");
    if (!m1.lookahead().is_trivial() || !m2.lookahead().is_trivial())
        throw Error(ErrorCode::not_applicable, "the gadget needs transducers without look-ahead");

    GadgetNames n;
    std::set<std::string> q1;
    for (std::size_t q = 0; q < m1.state_count(); ++q) q1.insert(m1.state_name(static_cast<int>(q)));
    std::set<std::string> used = q1;
    for (std::size_t q = 0; q < m2.state_count(); ++q) {
        const std::string& name = m2.state_name(static_cast<int>(q));
        if (!q1.count(name)) used.insert(name);
    }
    for (std::size_t q = 0; q < m2.state_count(); ++q) {
        const std::string& name = m2.state_name(static_cast<int>(q));
        if (!q1.count(name)) continue;
        std::string to = fresh(name + "~2", [&](const std::string& s) { return used.count(s) > 0; });
        used.insert(to);
        n.renamed.emplace(name, to);
    }
    Mtt r2 = n.renamed.empty() ? m2 : rename_states(m2, n.renamed);
    n.q0 = fresh("q0", [&](const std::string& s) { return used.count(s) > 0; });
    used.insert(n.q0);
    n.q = fresh("q", [&](const std::string& s) { return used.count(s) > 0; });
    used.insert(n.q);
    n.a = fresh("a", [&](const std::string& s) { return m1.input().contains(Symbol::intern(s)); });
    n.f = fresh("f", [&](const std::string& s) { return m1.output().contains(Symbol::intern(s)); });
    n.e = fresh("e", [&](const std::string& s) { return s == n.f || m1.output().contains(Symbol::intern(s)); });

    RankedAlphabet in = m1.input();
    std::size_t a_index = in.add(n.a, 1);
    RankedAlphabet out = m1.output();
    out.add(n.f, 2);
    out.add(n.e, 0);
    TreeAutomaton la = TreeAutomaton::trivial(in, m1.lookahead().state_name(0));

    Mtt g(m1.name() + "_" + m2.name() + "_gadget", in, out, la);
    for (const Mtt* src : std::array<const Mtt*, 2>{&m1, &r2})
        for (std::size_t q = 0; q < src->state_count(); ++q)
            g.add_state(src->state_name(static_cast<int>(q)), src->rank(static_cast<int>(q)));
    int q0 = g.add_state(n.q0, 0);
    int q = g.add_state(n.q, 3);
    g.set_initial(q0);

    for (const Mtt* src : std::array<const Mtt*, 2>{&m1, &r2})
        src->for_each_rule([&](int s, std::size_t sym, const std::vector<int>& args, const Tree& rhs) {
            g.put_rule(*g.find_state(src->state_name(s)), sym, args, rhs);
        });

    Symbol f = Symbol::intern(n.f);
    Tree e = Tree::leaf(n.e);
    auto y = [](int j) { return Tree::make(Symbol::param(j)); };
    const std::string& i1 = m1.state_name(m1.initial());
    const std::string& i2 = r2.state_name(r2.initial());

    g.put_rule(q0, a_index, {0},
               Tree::make(Symbol::call(n.q, 1),
                          {Tree::make(Symbol::call(i1, 1)), Tree::make(Symbol::call(i2, 1)), e}));
    g.put_rule(q, a_index, {0},
               Tree::make(f, {Tree::make(Symbol::call(n.q, 1), {y(1), y(2), Tree::make(f, {y(1), y(3)})}),
                              Tree::make(Symbol::call(n.q, 1), {y(1), y(2), Tree::make(f, {y(2), y(3)})})}));
    for (std::size_t s = 0; s < m1.input().size(); ++s) {
        std::vector<int> args(static_cast<std::size_t>(m1.input()[s].rank), 0);
        g.put_rule(q0, s, args, e);
        g.put_rule(q, s, args, y(3));
    }
    for (std::size_t s = 0; s + 2 < g.state_count(); ++s) {
        int st = static_cast<int>(s);
        g.put_rule(st, a_index, {0}, Tree::make(Symbol::call(g.state_name(st), 1), param_list(g.rank(st))));
    }
    if (names) *names = n;
    return g;
}

const char* to_string(LsoiHint hint) {
    return hint == LsoiHint::linear_consistent ? "LinearConsistent" : "SuperLinear";
}

namespace {

// Ordinary least squares on (x, y).
std::pair<double, double> fit(const std::vector<LsoiSample>& s, std::size_t from, std::size_t to) {
    double n = static_cast<double>(to - from), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = from; k < to; ++k) {
        double x = static_cast<double>(s[k].input_size), yv = static_cast<double>(s[k].distinct_subtrees);
        sx += x;
        sy += yv;
        sxx += x * x;
        sxy += x * yv;
    }
    double den = n * sxx - sx * sx;
    if (n == 0) return {0, 0};
    if (std::abs(den) < 1e-12) return {sy / n, 0};
    double slope = (n * sxy - sx * sy) / den;
    return {(sy - slope * sx) / n, slope};
}

}  // namespace

LsoiProfile profile_lsoi(const Mtt& m, const std::vector<Tree>& inputs) {
    LsoiProfile p;
    Evaluator ev(m);
    for (const Tree& s : inputs) {
        Tree out = ev.apply(s);
        p.samples.push_back({s, s.size(), distinct_subtree_count(out)});
    }
    if (p.samples.empty()) return p;
    auto [a, b] = fit(p.samples, 0, p.samples.size());
    p.intercept = a;
    p.slope = b;
    for (const LsoiSample& s : p.samples) {
        double yv = static_cast<double>(s.distinct_subtrees);
        double err = std::abs(yv - (a + b * static_cast<double>(s.input_size)));
        p.residual_ratio = std::max(p.residual_ratio, err / std::max(1.0, yv));
        p.max_ratio = std::max(p.max_ratio, yv / static_cast<double>(std::max<std::uint64_t>(1, s.input_size)));
    }
    std::size_t half = p.samples.size() / 2;
    if (half >= 2) {
        auto [a1, b1] = fit(p.samples, 0, half);
        bool above = true;
        for (std::size_t k = half; k < p.samples.size(); ++k) {
            double pred = a1 + b1 * static_cast<double>(p.samples[k].input_size);
            above = above && static_cast<double>(p.samples[k].distinct_subtrees) > 1.25 * pred;
        }
        if (above) p.hint = LsoiHint::super_linear;
    }
    return p;
}

std::optional<Tree> sampled_equivalence(const Mtt& m1, const Mtt& m2, std::size_t size_budget) {
    if (!(m1.input() == m2.input()))
        throw Error(ErrorCode::alphabet_mismatch, "the transducers must share the input alphabet");
    Evaluator e1(m1), e2(m2);
    for (const Tree& s : enumerate_trees(m1.input(), size_budget))
        if (e1.apply(s) != e2.apply(s)) return s;
    return std::nullopt;
}

}  // namespace mttlab
