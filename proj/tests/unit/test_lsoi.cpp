#include <doctest.h>

#include <unordered_set>

#include "mttlab/format.hpp"
#include "mttlab/lsoi.hpp"
#include "oracles/corpus.hpp"
#include "oracles/naive.hpp"

using namespace mttlab;

namespace {

Tree T(const char* s) { return parse_tree(s); }

Tree pumped(int n, const Tree& t) {
    Tree out = t;
    for (int k = 0; k <= n; ++k) out = Tree::make(Symbol::intern("a"), {out});
    return out;
}

// The leaf lists hanging below the binary f-spine of depth n.
void lists(const Tree& t, int depth, std::vector<Tree>& out) {
    if (depth == 0) {
        out.push_back(t);
        return;
    }
    REQUIRE(t.label().text() == "f");
    lists(t.child(0), depth - 1, out);
    lists(t.child(1), depth - 1, out);
}

std::size_t list_length(const Tree& t) {
    std::size_t n = 0;
    for (Tree cur = t; cur.label().text() == "f"; cur = cur.child(1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("gadget shape") {
    Mtt b = oracle::fixture("CONSTB"), c = oracle::fixture("CONSTC");
    GadgetNames names;
    Mtt g = build_gadget(b, c, &names);
    CHECK(validate(g).ok_except_nondeletion());
    CHECK(g.rank(*g.find_state(names.q)) == 3);
    CHECK(apply(g, T("g(e)")) == T("e"));
    CHECK(apply(g, T("e")) == T("e"));

    for (int n = 1; n <= 6; ++n) {
        Tree out = apply(g, pumped(n, T("e")));
        std::vector<Tree> leaves;
        lists(out, n, leaves);
        CHECK(leaves.size() == (1u << n));
        std::unordered_set<Tree, TreeHash> distinct(leaves.begin(), leaves.end());
        CHECK(distinct.size() == leaves.size());
        for (const Tree& l : leaves) CHECK(list_length(l) == static_cast<std::size_t>(n));
    }
}

TEST_CASE("gadget list order follows reversed paths") {
    Mtt b = oracle::fixture("CONSTB"), c = oracle::fixture("CONSTC");
    Tree out = apply(build_gadget(b, c), pumped(2, T("e")));
    // leaf at path i1 i2 carries f(t_i2, f(t_i1, e))
    CHECK(subtree_at(out, Path{1, 2}) == T("f(c, f(b, e))"));
    CHECK(subtree_at(out, Path{2, 1}) == T("f(b, f(c, e))"));
    CHECK(subtree_at(out, Path{1, 1}) == T("f(b, f(b, e))"));
}

TEST_CASE("interior a's are skipped") {
    Mtt b = oracle::fixture("CONSTB"), c = oracle::fixture("CONSTC");
    Mtt g = build_gadget(b, c);
    CHECK(apply(g, pumped(3, T("g(g(e))"))) == apply(g, pumped(3, T("e"))));
}

TEST_CASE("equal pair collapses levels") {
    Mtt b = oracle::fixture("CONSTB");
    Mtt g = build_gadget(b, b);
    for (int n = 1; n <= 10; ++n) {
        Tree out = apply(g, pumped(n, T("e")));
        CHECK(oracle::distinct_subtrees(oracle::from(out)) <= static_cast<std::size_t>(2 * (n + 1) + 2));
    }
}

TEST_CASE("renaming shared state names") {
    Mtt b = oracle::fixture("CONSTB");
    GadgetNames names;
    Mtt g = build_gadget(b, b, &names);
    CHECK(!names.renamed.empty());
    CHECK(g.find_state(names.q0));
    for (auto& [from, to] : names.renamed) CHECK(g.find_state(to));
}

TEST_CASE("alphabet mismatch") {
    Mtt b = oracle::fixture("CONSTB");
    Mtt ident = oracle::fixture("IDENT");
    try {
        build_gadget(b, ident);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::alphabet_mismatch);
    }
}

TEST_CASE("profiles") {
    Mtt ident = oracle::fixture("IDENT");
    std::vector<Tree> combs;
    Tree t = T("a");
    for (int n = 1; n <= 8; ++n) combs.push_back(t = Tree::make(Symbol::intern("f"), {t, T("a")}));
    auto p = profile_lsoi(ident, combs);
    for (std::size_t k = 0; k < combs.size(); ++k)
        CHECK(p.samples[k].distinct_subtrees == oracle::distinct_subtrees(oracle::from(combs[k])));

    Mtt b = oracle::fixture("CONSTB"), c = oracle::fixture("CONSTC");
    std::vector<Tree> inputs;
    for (int n = 1; n <= 10; ++n) inputs.push_back(pumped(n, T("e")));
    auto differ = profile_lsoi(build_gadget(b, c), inputs);
    for (std::size_t k = 0; k < differ.samples.size(); ++k) {
        CHECK(differ.samples[k].distinct_subtrees >= (1u << (k + 1)));
        CHECK(differ.samples[k].distinct_subtrees ==
              oracle::distinct_subtrees(oracle::apply(build_gadget(b, c), oracle::from(inputs[k]))));
    }
    CHECK(differ.hint == LsoiHint::super_linear);
    auto same = profile_lsoi(build_gadget(b, b), inputs);
    CHECK(same.hint == LsoiHint::linear_consistent);
    CHECK(same.residual_ratio < 0.05);
}

TEST_CASE("sampled equivalence") {
    Mtt ident = oracle::fixture("IDENT");
    CHECK(!sampled_equivalence(ident, ident, 6));
    Mtt b = oracle::fixture("CONSTB"), c = oracle::fixture("CONSTC");
    auto s = sampled_equivalence(b, c, 6);
    REQUIRE(s);
    CHECK(s->size() == 1);
    // a counterexample exists iff the gadget is super-linear on it
    auto p = profile_lsoi(build_gadget(b, c), {pumped(6, *s)});
    CHECK(p.samples[0].distinct_subtrees >= 64);
}
