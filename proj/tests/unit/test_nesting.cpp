#include <doctest.h>

#include <algorithm>

#include "mttlab/nesting.hpp"
#include "oracles/corpus.hpp"
#include "oracles/naive.hpp"

using namespace mttlab;

namespace {

Tree T(const char* s) { return parse_tree(s); }

Tree chain(const char* sym, int n, const char* leaf) {
    Tree t = Tree::leaf(leaf);
    for (int k = 0; k < n; ++k) t = Tree::make(Symbol::intern(sym), {t});
    return t;
}

// Full binary s-tree of height n.
Tree full(int n) {
    if (n == 0) return T("e");
    Tree c = full(n - 1);
    return Tree::make(Symbol::intern("s"), {c, c});
}

std::size_t sharps(const Tree& t) {
    std::size_t n = t.label().kind() == SymbolKind::sharp;
    for (const Tree& c : t.children()) n += sharps(c);
    return n;
}

}  // namespace

TEST_CASE("sharpen and erasure law") {
    for (const Mtt& m : oracle::corpus(10)) {
        Mtt s = sharpen(m);
        for (const Tree& t : enumerate_trees(m.input(), 6)) REQUIRE(erase_sharps(apply(s, t)) == apply(m, t));
    }
    Mtt nest = oracle::fixture("NEST2");
    Tree out = apply(sharpen(nest), T("a(a(e))"));
    // q0 on the root, q once on a(e) and twice on e
    CHECK(sharps(out) == 4);
    CHECK(erase_sharps(out) == T("b(b(c))"));
}

TEST_CASE("origins") {
    Mtt ident = oracle::fixture("IDENT");
    Tree t = T("f(a, a)");
    auto o = origins(ident, t);
    CHECK(std::find(o.begin(), o.end(), OriginPair{Path{}, Path{}}) != o.end());
    Tree out = apply(sharpen(ident), t);
    CHECK(o.size() == out.size());
    for (auto& [u, v] : o) {
        CHECK_NOTHROW(subtree_at(t, u));
        CHECK_NOTHROW(subtree_at(out, v));
    }
}

TEST_CASE("state call trees") {
    auto single = state_call_tree(oracle::fixture("IDENT"), T("a"));
    CHECK(single.size() == 1);
    CHECK(single.nodes()[0].input == Path{});

    Mtt nest = oracle::fixture("NEST2");
    Tree t = T("a(a(e))");
    auto sc = state_call_tree(nest, t);
    REQUIRE(sc.size() == 4);
    CHECK(sc.nodes()[0].children.size() == 1);
    std::size_t at_one = 0;
    for (auto& n : sc.nodes()) {
        if (n.input == Path{1, 1}) ++at_one;
        if (n.parent >= 0) CHECK(sc.nodes()[n.parent].input.length() + 1 == n.input.length());
    }
    CHECK(at_one == 2);

    // node set = #-markers of M#(t)
    Mtt s = sharpen(nest);
    for (int n = 1; n <= 5; ++n) {
        Tree in = chain("a", n, "e");
        CHECK(state_call_tree(nest, in).size() == sharps(apply(s, in)));
    }
}

TEST_CASE("trim and width") {
    Mtt nest = oracle::fixture("NEST2");
    std::size_t last = 0;
    for (int n = 1; n <= 6; ++n) {
        Tree in = chain("a", n, "e");
        Tree out = apply(sharpen(nest), in);
        Path u(std::vector<int>(static_cast<std::size_t>(n), 1));
        // deepest output path
        std::vector<int> steps;
        for (Tree cur = out; cur.arity() > 0; cur = cur.child(0)) steps.push_back(1);
        auto sc = trim(state_call_tree(nest, in), u, Path(steps));
        CHECK(sc.width() > last);
        last = sc.width();
        CHECK(trim(state_call_tree(nest, in), Path{}, Path{}).size() == 1);
    }
    Mtt ident = oracle::fixture("IDENT");
    for (const Tree& in : enumerate_trees(ident.input(), 6)) {
        auto sc = state_call_tree(ident, in);
        for (auto& n : sc.nodes()) CHECK(trim(sc, n.input, n.output).width() == 1);
    }
}

TEST_CASE("find_pattern") {
    // all labels distinct
    CHECK(!find_pattern({-1, 0, 1, 2}, {0, 1, 2, 3}));
    // N_q0 = 1 and N_q = 2 side by side, 3 and 4 under 1, 5 under 2
    std::vector<int> parent{-1, 0, 0, 1, 1, 2};
    auto p5 = find_pattern(parent, {0, 7, 8, 7, 8, 8});
    REQUIRE(p5);
    CHECK(*p5 == std::array<int, 5>{1, 2, 3, 4, 5});
    CHECK(!find_pattern(parent, {0, 7, 8, 7, 8, 9}));

    Mtt nest = oracle::fixture("NEST2");
    Tree in = chain("a", 5, "e");
    Tree out = apply(sharpen(nest), in);
    std::vector<int> steps;
    for (Tree cur = out; cur.arity() > 0; cur = cur.child(0)) steps.push_back(1);
    auto sc = trim(state_call_tree(nest, in), Path(std::vector<int>(5, 1)), Path(steps));
    auto p = find_pattern(sc);
    REQUIRE(p);
    CHECK(sc.nodes()[(*p)[0]].state == sc.nodes()[(*p)[1]].state);

    CHECK(!find_pattern(state_call_tree(oracle::fixture("IDENT"), T("f(a, a)"))));
}

TEST_CASE("nesting loop of NEST2") {
    Mtt nest = oracle::fixture("NEST2");
    auto loop = find_nesting_loop(nest);
    REQUIRE(loop);
    CHECK(loop->kind == LoopKind::nesting);
    CHECK(to_string(loop->context) == "a(@X)");
    CHECK(nest.state_name(loop->q) == "q");
    CHECK(loop->i == 1);
    CHECK(is_nesting_loop(nest, *loop));
    for (int k = 1; k <= 8; ++k) {
        Tree in = pumped_input(nest, *loop, k);
        CHECK(in.size() >= static_cast<std::uint64_t>(k));
        CHECK(apply(nest, in).height() >= (1u << k));
    }
}

TEST_CASE("no loops on linear fixtures") {
    for (const char* name : {"IDENT", "DOUBLE", "REVDEWEY"}) {
        Mtt m = oracle::fixture(name);
        CHECK(!find_nesting_loop(m));
        CHECK(!find_ml_nesting_loop(m));
    }
}

TEST_CASE("ML loop of MLNEST") {
    Mtt ml = oracle::fixture("MLNEST");
    CHECK(!find_nesting_loop(ml));
    auto loop = find_ml_nesting_loop(ml);
    REQUIRE(loop);
    CHECK(loop->kind == LoopKind::ml_nesting);
    CHECK(is_ml_nesting_loop(ml, *loop));
    CHECK(!is_nesting_loop(ml, *loop));
    for (int n = 1; n <= 8; ++n) CHECK(apply(ml, full(n)).height() == (1u << n) + 1);
}

TEST_CASE("call contexts") {
    Mtt nest = oracle::fixture("NEST2");
    auto c = call_context(nest, *nest.find_state("q"), 0);
    REQUIRE(c);
    Tree prov = provisional_output(nest, first_order_subst(*c, {{hole_mark(0), Tree::leaf(la_mark(nest, 0))}}));
    CHECK(to_string(prov).find("<q,") != std::string::npos);
}

TEST_CASE("decisions on fixtures") {
    auto lshi = [](const char* n) { return decide_lshi(oracle::fixture(n)); };
    auto lhi = [](const char* n) { return decide_lhi(oracle::fixture(n)); };
    for (const char* n : {"IDENT", "DOUBLE", "REVDEWEY", "COLLAPSE", "CONSTB", "CONSTC", "IMPROP"}) {
        CAPTURE(n);
        auto a = lshi(n), b = lhi(n);
        CHECK(a.verdict);
        CHECK(b.verdict);
        CHECK(a.factor == a.nesting_bound * a.rhs_height + 1);
        CHECK(!a.loop);
    }
    auto n = lshi("NEST2");
    CHECK(!n.verdict);
    REQUIRE(n.loop);
    CHECK(n.loop->kind == LoopKind::nesting);
    auto nh = lhi("NEST2");
    CHECK(!nh.verdict);
    CHECK(nh.loop->kind == LoopKind::nesting);
    CHECK(lshi("MLNEST").verdict);
    auto m = lhi("MLNEST");
    CHECK(!m.verdict);
    REQUIRE(m.loop);
    CHECK(m.loop->kind == LoopKind::ml_nesting);
}

TEST_CASE("reported bounds hold on small inputs") {
    for (const char* name : {"IDENT", "DOUBLE", "REVDEWEY", "IMPROP"}) {
        Mtt m = oracle::fixture(name);
        auto s = decide_lshi(m), h = decide_lhi(m);
        for (const Tree& t : enumerate_trees(m.input(), 9)) {
            auto out = oracle::height(oracle::apply(m, oracle::from(t)));
            CHECK(out <= static_cast<std::size_t>(s.factor) * t.size());
            CHECK(out <= static_cast<std::size_t>(h.factor) * t.height());
        }
    }
}
