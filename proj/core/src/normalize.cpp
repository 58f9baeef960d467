#include "mttlab/normalize.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

#include "mttlab/format.hpp"

namespace mttlab {

namespace {

// Paths of set leaves in pre-order.
void set_leaf_paths(const Tree& t, const Path& at, std::vector<Path>& out) {
    if (t.label().kind() == SymbolKind::param_set) {
        out.push_back(at);
        return;
    }
    for (std::size_t i = 0; i < t.arity(); ++i) set_leaf_paths(t.child(i), at.child(static_cast<int>(i) + 1), out);
}

std::string fresh_name(const std::string& base, std::set<std::string>& used) {
    for (int n = 1;; ++n) {
        std::string name = base + "~" + std::to_string(n);
        if (used.insert(name).second) return name;
    }
}

// A rhs with parameters y1..yn for a key that is never used.
Tree dummy_rhs(const Mtt& m, int self, int arity_of_symbol, int n) {
    std::vector<Tree> params;
    for (int j = 1; j <= n; ++j) params.push_back(Tree::make(Symbol::param(j)));
    if (arity_of_symbol >= 1) return Tree::make(Symbol::call(m.state_name(self), 1), std::move(params));
    if (n == 1) return params[0];
    std::optional<RankedSymbol> leaf, wide;
    for (const RankedSymbol& d : m.output()) {
        if (d.rank == 0 && !leaf) leaf = d;
        if (d.rank >= 2 && (!wide || d.rank > wide->rank)) wide = d;
    }
    if (!leaf) throw Error(ErrorCode::internal, "output alphabet has no nullary symbol");
    if (n == 0) return Tree::make(leaf->symbol);
    if (!wide) throw Error(ErrorCode::internal, "cannot build a filler rule with several parameters");
    // wide(y1, wide(y2, ... wide(yn, c) ...)) with spare slots filled by c.
    Tree acc = Tree::make(leaf->symbol);
    for (int j = n; j >= 1; --j) {
        std::vector<Tree> kids{params[j - 1], acc};
        while (static_cast<int>(kids.size()) < wide->rank) kids.push_back(Tree::make(leaf->symbol));
        acc = Tree::make(wide->symbol, std::move(kids));
    }
    return acc;
}

}  // namespace

Tree theta_subst(const Mtt& m, PoutAnalysis& analysis, const Tree& rhs,
                 const std::vector<int>& children,
                 const std::function<std::string(int, int, const Tree&, const Path&)>& helper_name) {
    const auto& states = analysis.phi_states();
    std::function<Tree(const Tree&, const Path&, int, int, const Tree&, int, const std::vector<Tree>&)>
        inst = [&](const Tree& t, const Path& at, int p, int r, const Tree& form, int var,
                   const std::vector<Tree>& args) -> Tree {
        Symbol lab = t.label();
        if (lab.is_param()) return args[lab.index() - 1];
        if (lab.kind() == SymbolKind::param_set) {
            std::vector<Tree> sel;
            for (int j : lab.indices()) sel.push_back(args[j - 1]);
            return Tree::make(Symbol::call(helper_name(p, r, form, at), var), std::move(sel));
        }
        std::vector<Tree> kids;
        for (std::size_t i = 0; i < t.arity(); ++i)
            kids.push_back(inst(t.child(i), at.child(static_cast<int>(i) + 1), p, r, form, var, args));
        return Tree::make(lab, std::move(kids));
    };
    std::function<Tree(const Tree&)> sub = [&](const Tree& t) -> Tree {
        Symbol lab = t.label();
        if (lab.is_param()) return t;
        std::vector<Tree> kids;
        for (const Tree& c : t.children()) kids.push_back(sub(c));
        if (lab.kind() == SymbolKind::call) {
            int r = m.call_target(lab);
            std::size_t i = static_cast<std::size_t>(lab.index() - 1);
            if (i >= children.size()) throw Error(ErrorCode::missing_phi, "no form for child " + std::to_string(i + 1));
            const auto& st = states[children[i]];
            if (analysis.in_F1(st.la, r))
                return inst(st.phi[r], Path(), st.la, r, st.phi[r], lab.index(), kids);
        }
        return Tree::make(lab, std::move(kids));
    };
    return sub(rhs);
}

PiResult build_pi(const Mtt& m) {
    require_valid(m);
    PoutAnalysis analysis(m);
    const auto& states = analysis.phi_states();
    const auto& la = m.lookahead();
    const auto& in = m.input();

    // Look-ahead states (p, phi).
    std::vector<int> per_base(la.state_count(), 0);
    for (const auto& st : states) ++per_base[st.la];
    std::vector<std::string> names;
    std::set<std::string> used_la;
    std::vector<int> counter(la.state_count(), 0);
    for (const auto& st : states) {
        std::string base = la.state_name(st.la);
        std::string name = base;
        if (per_base[st.la] > 1 || used_la.count(name)) {
            do name = base + "." + std::to_string(++counter[st.la]);
            while (used_la.count(name));
        }
        used_la.insert(name);
        names.push_back(name);
    }
    TreeAutomaton la2(in, names);
    for (std::size_t s = 0; s < in.size(); ++s)
        for (auto& tuple : la2.tuples(in[s].rank)) la2.set(in[s].symbol, tuple, analysis.phi_next(s, tuple));
    la2.finish();

    // Helper states.
    std::set<std::string> used_states;
    for (std::size_t q = 0; q < m.state_count(); ++q) used_states.insert(m.state_name(static_cast<int>(q)));
    std::map<std::tuple<int, int, const void*, std::string>, std::size_t> helper_index;
    std::vector<HelperState> helpers;
    for (const auto& st : states)
        for (std::size_t r = 0; r < m.state_count(); ++r) {
            if (!st.phi[r].valid()) continue;
            std::vector<Path> holes;
            set_leaf_paths(st.phi[r], Path(), holes);
            for (const Path& u : holes) {
                auto key = std::make_tuple(st.la, static_cast<int>(r), static_cast<const void*>(st.phi[r].node()),
                                           u.to_string());
                if (helper_index.count(key)) continue;
                helper_index.emplace(key, helpers.size());
                helpers.push_back({st.la, static_cast<int>(r), st.phi[r], u,
                                   label_at(st.phi[r], u).indices(),
                                   fresh_name(m.state_name(static_cast<int>(r)), used_states)});
            }
        }
    auto helper_name = [&](int p, int r, const Tree& form, const Path& u) -> std::string {
        auto it = helper_index.find(std::make_tuple(p, r, static_cast<const void*>(form.node()), u.to_string()));
        if (it == helper_index.end()) throw Error(ErrorCode::internal, "unknown helper state");
        return helpers[it->second].name;
    };

    Mtt out(m.name(), in, m.output(), la2);
    for (std::size_t q = 0; q < m.state_count(); ++q)
        out.add_state(m.state_name(static_cast<int>(q)), m.rank(static_cast<int>(q)));
    std::vector<int> helper_state;
    for (const HelperState& h : helpers)
        helper_state.push_back(out.add_state(h.name, static_cast<int>(h.selection.size())));
    out.set_initial(m.initial());

    for (std::size_t s = 0; s < in.size(); ++s) {
        for (auto& tuple : la2.tuples(in[s].rank)) {
            std::vector<int> bases;
            for (int c : tuple) bases.push_back(states[c].la);
            int target = la2.next(s, tuple);
            std::map<int, Tree> full;
            for (std::size_t q = 0; q < m.state_count(); ++q) {
                Tree rhs = theta_subst(m, analysis, m.rule(static_cast<int>(q), s, bases), tuple, helper_name);
                full.emplace(static_cast<int>(q), rhs);
                out.put_rule(static_cast<int>(q), s, tuple, rhs);
            }
            for (std::size_t h = 0; h < helpers.size(); ++h) {
                const HelperState& hs = helpers[h];
                int n = static_cast<int>(hs.selection.size());
                const auto& st = states[target];
                bool consistent = st.la == hs.la && st.phi[hs.state].valid() && st.phi[hs.state] == hs.form;
                if (!consistent) {
                    out.put_rule(helper_state[h], s, tuple, dummy_rhs(out, helper_state[h], in[s].rank, n));
                    continue;
                }
                const Tree& whole = full.at(hs.state);
                Tree cur = whole;
                for (int step : hs.hole.steps()) {
                    if (cur.label().kind() != SymbolKind::plain || step > static_cast<int>(cur.arity()))
                        throw Error(ErrorCode::internal, "helper hole is not an output position");
                    cur = cur.child(static_cast<std::size_t>(step - 1));
                }
                std::map<Symbol, Tree> renumber;
                for (int k = 0; k < n; ++k)
                    renumber.emplace(Symbol::param(hs.selection[k]), Tree::make(Symbol::param(k + 1)));
                out.put_rule(helper_state[h], s, tuple, first_order_subst(cur, renumber));
            }
        }
    }
    Mtt gc = restrict_to_reachable_states(out);
    std::vector<HelperState> kept;
    for (const HelperState& h : helpers)
        if (gc.find_state(h.name)) kept.push_back(h);
    return {std::move(gc), std::move(kept)};
}

DepthProperCheck is_depth_proper(const Mtt& m) {
    PoutAnalysis analysis(m);
    DepthProperCheck out;
    for (auto [q, p] : reachable_calls(m)) {
        ParamMask f = analysis.F(p, q);
        if (f) {
            out.proper = false;
            out.state = q;
            out.param = params_in(f).front();
            out.la = p;
            return out;
        }
    }
    return out;
}

std::string describe_F(const Mtt& m, PoutAnalysis& analysis) {
    std::ostringstream os;
    for (std::size_t p = 0; p < m.la_count(); ++p)
        for (std::size_t q = 0; q < m.state_count(); ++q) {
            ParamMask f = analysis.F(static_cast<int>(p), static_cast<int>(q));
            if (!f) continue;
            os << "F_" << m.lookahead().state_name(static_cast<int>(p)) << "("
               << m.state_name(static_cast<int>(q)) << ") = "
               << Symbol::param_set(params_in(f)).text() << "\n";
        }
    return os.str();
}

NormalizeResult depth_proper(const Mtt& m, int max_iters, NormalizeTrace* trace) {
    require_valid(m);
    NormalizeResult result{m, 0};
    while (true) {
        if (trace) {
            PoutAnalysis analysis(result.mtt);
            trace->rounds.push_back(print_mtt(result.mtt) + describe_F(result.mtt, analysis));
        }
        if (is_depth_proper(result.mtt).proper) return result;
        if (result.iterations >= max_iters)
            throw Error(ErrorCode::iteration_cap_exceeded,
                        "not depth-proper after " + std::to_string(max_iters) + " iterations");
        result.mtt = build_pi(result.mtt).mtt;
        ++result.iterations;
    }
}

}  // namespace mttlab
