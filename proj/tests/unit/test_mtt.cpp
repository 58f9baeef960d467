#include <doctest.h>

#include "mttlab/format.hpp"
#include "mttlab/mtt.hpp"
#include "oracles/corpus.hpp"
#include "oracles/naive.hpp"

using namespace mttlab;

namespace {
Tree T(const char* s) { return parse_tree(s); }
}  // namespace

TEST_CASE("fixtures validate") {
    for (auto& name : oracle::fixture_names()) {
        CAPTURE(name);
        CHECK(validate(oracle::fixture(name)).ok());
    }
}

TEST_CASE("validation violations") {
    Mtt ident = oracle::fixture("IDENT");
    std::string text = print_mtt(ident);
    std::string broken = text.substr(0, text.rfind("q0, a"));
    auto report = validate(parse_mtt(broken));
    CHECK(report.has(ViolationKind::totality));

    Mtt drop = parse_mtt(R"(
input a/1 e/0
output b/1 c/0
states q0/0 q/1
initial q0
q0, a(x1) -> <q,x1>(c)
q0, e -> c
q, a(x1) (y1) -> <q,x1>(y1)
q, e (y1) -> c
)");
    auto r = validate(drop);
    CHECK(r.has(ViolationKind::nondeletion));
    CHECK(r.ok_except_nondeletion());
    CHECK_THROWS_AS(require_valid(drop), Error);
}

TEST_CASE("evaluation examples") {
    Mtt nest2 = oracle::fixture("NEST2");
    CHECK(eval_state(nest2, *nest2.find_state("q"), T("a(e)")) == T("b(b(y1))"));
    CHECK(apply(nest2, T("a(a(a(e)))")) == T("b(b(b(b(c))))"));
    Mtt ident = oracle::fixture("IDENT");
    CHECK(apply(ident, T("f(a,a)")) == T("f(a,a)"));
    CHECK(apply(ident, T("a")) == T("a"));
    Mtt dbl = oracle::fixture("DOUBLE");
    CHECK(apply(dbl, T("a(e)")) == T("f(c,c)"));
    Mtt dewey = oracle::fixture("REVDEWEY");
    CHECK(apply(dewey, T("a(a(e))")) == T("f(f(1(1(e)), 2(1(e))), f(1(2(e)), 2(2(e))))"));
}

TEST_CASE("apply agrees with the rewriting oracle on fixtures up to size 6") {
    for (auto& name : oracle::fixture_names()) {
        CAPTURE(name);
        Mtt m = oracle::fixture(name);
        Evaluator ev(m);
        for (const Tree& s : enumerate_trees(m.input(), 6))
            REQUIRE(to_string(ev.apply(s)) == oracle::show(oracle::apply(m, oracle::from(s))));
    }
}

TEST_CASE("every state output keeps its parameters") {
    for (auto& name : oracle::fixture_names()) {
        Mtt m = oracle::fixture(name);
        Evaluator ev(m);
        for (const Tree& s : enumerate_trees(m.input(), 6))
            for (std::size_t q = 0; q < m.state_count(); ++q) {
                std::vector<int> want;
                for (int j = 1; j <= m.rank(static_cast<int>(q)); ++j) want.push_back(j);
                REQUIRE(params_of(ev.eval(static_cast<int>(q), s)) == want);
            }
    }
}

TEST_CASE("extension and provisional outputs") {
    Mtt ident = oracle::fixture("IDENT");
    Mtt ext = extend(ident);
    CHECK(ext.input().size() == ident.input().size() + ident.la_count());
    CHECK(to_string(apply(ext, T("@p"))) == "<q0,@p>");
    for (const Tree& s : enumerate_trees(ident.input(), 6)) CHECK(apply(ext, s) == apply(ident, s));
    CHECK(to_string(provisional_output(ident, T("@p"))) == "<q0,@p>");

    Mtt nest2 = oracle::fixture("NEST2");
    CHECK(to_string(provisional_output(nest2, T("a(a(@p))"))) == "<q,@p>(<q,@p>(c))");
    Mtt dbl = oracle::fixture("DOUBLE");
    CHECK(to_string(provisional_output(dbl, T("a(@p)"))) == "f(<q0,@p>, <q0,@p>)");
}

TEST_CASE("plugging a tree into a marked leaf") {
    Mtt m = oracle::fixture("COLLAPSE");
    Symbol odd = Symbol::intern("@odd"), even = Symbol::intern("@even");
    for (const Tree& ctx : {T("a(@odd)"), T("a(a(@even))"), T("a(a(a(@odd)))")}) {
        Symbol mark = contains_label(ctx, odd) ? odd : even;
        int p = m.lookahead().state(mark.mark_name());
        Tree prov = provisional_output(m, ctx);
        for (const Tree& t : m.lookahead().enumerate_trees(p, 6)) {
            // Replace each <q,@p>(args) by M_q(t)[y <- args].
            std::function<Tree(const Tree&)> fill = [&](const Tree& u) -> Tree {
                std::vector<Tree> kids;
                for (const Tree& c : u.children()) kids.push_back(fill(c));
                if (u.label().kind() == SymbolKind::mark_call) {
                    Tree body = eval_state(m, *m.find_state(u.label().state()), t);
                    return substitute_params(body, kids);
                }
                return Tree::make(u.label(), std::move(kids));
            };
            CHECK(fill(prov) == apply(m, first_order_subst(ctx, {{mark, t}})));
        }
    }
}

TEST_CASE("reachable calls match the brute-force scan") {
    for (auto& name : oracle::fixture_names()) {
        CAPTURE(name);
        Mtt m = oracle::fixture(name);
        CHECK(reachable_calls(m) == oracle::reachable_pairs(m, 6));
    }
    for (const Mtt& m : oracle::random_corpus(10)) {
        CAPTURE(m.name());
        CHECK(reachable_calls(m) == oracle::reachable_pairs(m, 5));
    }
}

TEST_CASE("unused state is not reachable") {
    Mtt m = parse_mtt(R"(
input a/1 e/0
output b/1 c/0
states q0/0 q2/0
initial q0
q0, a(x1) -> b(<q0,x1>)
q0, e -> c
q2, a(x1) -> <q2,x1>
q2, e -> c
)");
    for (auto [q, p] : reachable_calls(m)) CHECK(q == 0);
    CHECK(restrict_to_reachable_states(m).state_count() == 1);
}
