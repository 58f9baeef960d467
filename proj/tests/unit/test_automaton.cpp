#include <doctest.h>

#include "mttlab/automaton.hpp"

using namespace mttlab;

namespace {

TreeAutomaton parity() {
    TreeAutomaton a(RankedAlphabet{{"a", 1}, {"e", 0}}, {"even", "odd"});
    a.set("a", {"even"}, "odd");
    a.set("a", {"odd"}, "even");
    a.set("e", {}, "even");
    a.finish();
    return a;
}

std::vector<std::string> printed(const std::vector<Tree>& v) {
    std::vector<std::string> out;
    for (auto& t : v) out.push_back(to_string(t));
    return out;
}

}  // namespace

TEST_CASE("run") {
    auto a = parity();
    CHECK(a.run(parse_tree("a(a(e))")) == a.state("even"));
    CHECK(a.run(parse_tree("a(e)")) == a.state("odd"));
    auto t = TreeAutomaton::trivial(RankedAlphabet{{"f", 2}, {"a", 0}});
    CHECK(t.run(parse_tree("f(a, f(a, a))")) == 0);
}

TEST_CASE("partial tables are rejected") {
    TreeAutomaton a(RankedAlphabet{{"a", 1}, {"e", 0}}, {"p", "q"});
    a.set("e", {}, "p");
    a.set("a", {"p"}, "q");
    CHECK(a.missing() == std::vector<std::string>{"a(q)"});
    CHECK_THROWS_AS(a.finish(), Error);
}

TEST_CASE("nonempty states, samples and enumeration") {
    auto a = parity();
    CHECK(a.nonempty_states() == std::vector<bool>{true, true});
    CHECK(to_string(*a.sample_tree(a.state("even"))) == "e");
    CHECK(to_string(*a.sample_tree(a.state("odd"))) == "a(e)");
    CHECK(printed(a.enumerate_trees(a.state("even"), 3)) == std::vector<std::string>{"e", "a(a(e))"});
    CHECK(a.enumerate_trees(a.state("even"), 0).empty());
    auto t = TreeAutomaton::trivial(RankedAlphabet{{"a", 1}, {"e", 0}});
    CHECK(printed(t.enumerate_trees(0, 3)) == std::vector<std::string>{"e", "a(e)", "a(a(e))"});
    CHECK(to_string(*t.sample_tree(0)) == "e");

    TreeAutomaton junk(RankedAlphabet{{"a", 1}, {"e", 0}}, {"p", "junk"});
    junk.set("e", {}, "p");
    junk.set("a", {"p"}, "p");
    junk.set("a", {"junk"}, "junk");
    junk.finish();
    CHECK(junk.nonempty_states() == std::vector<bool>{true, false});
    CHECK(!junk.sample_tree(1));
}

TEST_CASE("enumeration agrees with run and emptiness") {
    TreeAutomaton a(RankedAlphabet{{"f", 2}, {"g", 1}, {"a", 0}}, {"p0", "p1", "p2"});
    for (std::string x : {"p0", "p1", "p2"}) {
        a.set("g", {x}, x == "p0" ? "p1" : "p0");
        for (std::string y : {"p0", "p1", "p2"}) a.set("f", {x, y}, x == y ? "p2" : "p1");
    }
    a.set("a", {}, "p0");
    a.finish();
    auto all = a.enumerate_all(8);
    auto every = enumerate_trees(a.alphabet(), 8);
    std::size_t total = 0;
    for (std::size_t p = 0; p < all.size(); ++p) {
        for (const Tree& t : all[p]) CHECK(a.run(t) == static_cast<int>(p));
        total += all[p].size();
    }
    CHECK(total == every.size());
    auto ne = a.nonempty_states();
    std::size_t bound = a.state_count() * 2 + 1;
    for (std::size_t p = 0; p < all.size(); ++p)
        CHECK(ne[p] == !a.enumerate_trees(static_cast<int>(p), bound).empty());
}
