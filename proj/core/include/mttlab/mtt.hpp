#pragma once

// Total deterministic macro tree transducers with regular look-ahead.
//
// A right-hand side is a Tree over the output alphabet, state calls
// <q,xi> (rank = rank of q) and parameters yj.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mttlab/automaton.hpp"
#include "mttlab/tree.hpp"

namespace mttlab {

struct StateInfo {
    std::string name;
    int rank = 0;
};

enum class ViolationKind {
    totality,
    determinism,
    rank,
    param_range,
    var_range,
    unknown_state,
    unknown_symbol,
    nondeletion,
    initial,
    reserved_name,
};

const char* to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::string key;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    // True when the only problems are nondeletion violations.
    bool ok_except_nondeletion() const;
    bool has(ViolationKind kind) const;
};

class Mtt {
public:
    Mtt() = default;
    Mtt(std::string name, RankedAlphabet input, RankedAlphabet output, TreeAutomaton lookahead);

    const std::string& name() const { return name_; }
    void set_name(std::string name) { name_ = std::move(name); }
    const RankedAlphabet& input() const { return input_; }
    const RankedAlphabet& output() const { return output_; }
    const TreeAutomaton& lookahead() const { return la_; }
    std::size_t la_count() const { return la_.state_count(); }

    int add_state(const std::string& name, int rank);
    std::size_t state_count() const { return states_.size(); }
    const StateInfo& state(int q) const { return states_[q]; }
    const std::string& state_name(int q) const { return states_[q].name; }
    int rank(int q) const { return states_[q].rank; }
    std::optional<int> find_state(std::string_view name) const;
    // State referenced by a <q,xi> or <q,@m> symbol; -1 if unknown.
    int call_target(Symbol call) const;

    void set_initial(int q) { initial_ = q; }
    int initial() const { return initial_; }

    // Returns false (and records a determinism violation) if the key is
    // already taken; the first rule wins.
    bool set_rule(int q, std::size_t symbol, const std::vector<int>& la, const Tree& rhs);
    // Overwrites unconditionally.
    void put_rule(int q, std::size_t symbol, const std::vector<int>& la, const Tree& rhs);
    const Tree* find_rule(int q, std::size_t symbol, const std::vector<int>& la) const;
    // Throws invalid_transducer if the rule is missing.
    const Tree& rule(int q, std::size_t symbol, const std::vector<int>& la) const;

    const std::vector<std::string>& duplicate_keys() const { return duplicates_; }

    // Printable rule key "q, sigma(x1:p1, x2:p2)".
    std::string key_string(int q, std::size_t symbol, const std::vector<int>& la) const;

    // Maximum height of a right-hand side (at least 1).
    int max_rhs_height() const;
    int max_state_rank() const;

    template <class F>
    void for_each_rule(F&& f) const {
        for (std::size_t q = 0; q < states_.size(); ++q)
            for (std::size_t s = 0; s < input_.size(); ++s)
                for (auto& la : la_.tuples(input_[s].rank)) {
                    const Tree* rhs = find_rule(static_cast<int>(q), s, la);
                    if (rhs) f(static_cast<int>(q), s, la, *rhs);
                }
    }

private:
    std::string name_;
    RankedAlphabet input_;
    RankedAlphabet output_;
    TreeAutomaton la_;
    std::vector<StateInfo> states_;
    std::unordered_map<std::string, int> state_index_;
    int initial_ = -1;
    // rules_[q][symbol][la tuple index]
    std::vector<std::vector<std::vector<std::optional<Tree>>>> rules_;
    std::vector<std::string> duplicates_;
};

ValidationReport validate(const Mtt& m);
// Throws not_nondeleting (or invalid_transducer) unless validate passes.
void require_valid(const Mtt& m);

// Evaluates states with memoization keyed by (state, interned input node).
// Marked leaves @m evaluate to <q,@m>(y1,...,ym); their look-ahead state is
// taken from `marks`, or from the look-ahead state named m.
class Evaluator {
public:
    explicit Evaluator(const Mtt& m, std::map<Symbol, int> marks = {});

    Tree eval(int q, const Tree& s);
    Tree apply(const Tree& s) { return eval(m_.initial(), s); }
    int la(const Tree& s);
    const Mtt& mtt() const { return m_; }

private:
    struct KeyHash {
        std::size_t operator()(const std::pair<int, const detail::Node*>& k) const {
            return std::hash<const void*>{}(k.second) * 31u + static_cast<std::size_t>(k.first);
        }
    };
    const Mtt& m_;
    std::map<Symbol, int> marks_;
    std::unordered_map<std::pair<int, const detail::Node*>, Tree, KeyHash> memo_;
    std::unordered_map<const detail::Node*, int> la_memo_;
    std::unordered_map<const detail::Node*, std::vector<Symbol>> calls_;
};

Tree eval_state(const Mtt& m, int q, const Tree& s);
Tree apply(const Mtt& m, const Tree& s);
// M-hat(s) for s over the input alphabet plus marked leaves.
Tree provisional_output(const Mtt& m, const Tree& s, const std::map<Symbol, int>& marks = {});

// Mark symbol @p for look-ahead state p.
Symbol la_mark(const Mtt& m, int p);

// The extension over input symbols @p (one per look-ahead state).
Mtt extend(const Mtt& m);

// Pairs (q, p) such that <q,@p> occurs in some provisional output whose
// marks stand for nonempty look-ahead languages.
std::set<std::pair<int, int>> reachable_calls(const Mtt& m);

// Call symbols occurring in a right-hand side, in pre-order of first
// occurrence.
std::vector<Symbol> calls_in(const Tree& rhs);

// Renames states of M (not look-ahead states or alphabets).
Mtt rename_states(const Mtt& m, const std::map<std::string, std::string>& states);

// A copy containing only the states reachable from the initial state
// through right-hand sides; state order is preserved.
Mtt restrict_to_reachable_states(const Mtt& m);

}  // namespace mttlab
