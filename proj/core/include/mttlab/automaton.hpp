#pragma once

// Total deterministic bottom-up tree automata.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mttlab/tree.hpp"

namespace mttlab {

class TreeAutomaton {
public:
    TreeAutomaton() = default;

    // Builder entry points; call finish() once every transition is set.
    TreeAutomaton(RankedAlphabet alphabet, std::vector<std::string> states);
    void set(Symbol symbol, const std::vector<int>& args, int target);
    void set(std::string_view symbol, const std::vector<std::string>& args,
             const std::string& target);
    // Throws invalid_transducer naming the first undefined transition.
    void finish();
    // Keys with no transition yet, as "sigma(p,q)".
    std::vector<std::string> missing() const;

    // Single-state automaton accepting every tree.
    static TreeAutomaton trivial(const RankedAlphabet& alphabet, const std::string& state = "p");

    const RankedAlphabet& alphabet() const { return alphabet_; }
    std::size_t state_count() const { return names_.size(); }
    const std::string& state_name(int p) const { return names_[p]; }
    const std::vector<std::string>& state_names() const { return names_; }
    std::optional<int> find_state(std::string_view name) const;
    int state(std::string_view name) const;
    bool is_trivial() const { return names_.size() == 1; }

    // Transition for the symbol at alphabet index `symbol`.
    int next(std::size_t symbol, const std::vector<int>& args) const;
    // Transition defined already (only meaningful before finish()).
    bool defined(std::size_t symbol, const std::vector<int>& args) const;

    // Marked leaves (@name) are resolved through `marks`.
    int run(const Tree& s, const std::map<Symbol, int>& marks = {}) const;

    std::vector<bool> nonempty_states() const;
    // A minimal-height member of L_p; ties broken by symbol declaration order
    // and then by the lexicographic order of argument state tuples.
    std::optional<Tree> sample_tree(int p) const;
    std::vector<std::optional<Tree>> sample_trees() const;

    // Every member of L_p with at most max_size nodes, sorted by
    // (size, printed form).
    std::vector<Tree> enumerate_trees(int p, std::size_t max_size) const;
    // Same for all states at once; index = state.
    std::vector<std::vector<Tree>> enumerate_all(std::size_t max_size) const;

    // Table index of an argument tuple.
    std::size_t tuple_index(const std::vector<int>& args) const;
    // All |P|^k tuples in lexicographic order.
    std::vector<std::vector<int>> tuples(int k) const;

private:
    RankedAlphabet alphabet_;
    std::vector<std::string> names_;
    std::vector<std::vector<int>> table_;
};

// Every tree over the alphabet with at most max_size nodes, sorted by
// (size, printed form).
std::vector<Tree> enumerate_trees(const RankedAlphabet& alphabet, std::size_t max_size);

}  // namespace mttlab
