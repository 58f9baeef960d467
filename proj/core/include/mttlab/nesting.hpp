#pragma once

// Nesting of state calls: M#, state call trees, generator loops and the
// LSHI / LHI decisions.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mttlab/mtt.hpp"

namespace mttlab {

// ---- M# and origins ----

Mtt sharpen(const Mtt& m);
// Removes every #q node.
Tree erase_sharps(const Tree& t);

struct OriginPair {
    Path input;
    Path output;
    friend bool operator==(const OriginPair&, const OriginPair&) = default;
    friend auto operator<=>(const OriginPair&, const OriginPair&) = default;
};

// Origin of every node of M#(t).  Exponential in general; meant for small t.
std::vector<OriginPair> origins(const Mtt& m, const Tree& t);

// ---- state call trees ----

struct ScNode {
    Path input;
    Path output;
    int state = -1;
    int la = -1;
    int arg = 0;  // set by trim; 0 otherwise
    int parent = -1;
    std::vector<int> children;
    int depth = 0;
};

class StateCallTree {
public:
    const std::vector<ScNode>& nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    // Largest number of nodes of equal depth.
    std::size_t width() const;
    // Label (state, la, arg) packed into one integer.
    int label(int n) const;

private:
    friend StateCallTree state_call_tree(const Mtt& m, const Tree& t);
    friend StateCallTree trim(const StateCallTree& sc, const Path& u, const Path& v);
    std::vector<ScNode> nodes_;
    int max_rank_ = 0;
    int la_count_ = 1;
    // Output of M# on the input, kept for argument labels.
    std::shared_ptr<const void> output_;
};

StateCallTree state_call_tree(const Mtt& m, const Tree& t);
StateCallTree trim(const StateCallTree& sc, const Path& u, const Path& v);

// Five nodes N_q0, N_q, N_q0_0, N_q_0, N_q_1 with equal depths in pairs,
// equal labels and the three ancestor relations.  `parent[n] < n` and node
// 0 is the root.
std::optional<std::array<int, 5>> find_pattern(const std::vector<int>& parent,
                                               const std::vector<int>& label);
std::optional<std::array<int, 5>> find_pattern(const StateCallTree& sc);

// ---- generator loops ----

enum class LoopKind { nesting, ml_nesting };
const char* to_string(LoopKind kind);

// Hole marks: @X for single-hole contexts, @X1 / @X2 otherwise.
Symbol hole_mark(int which);

struct GeneratorLoop {
    LoopKind kind = LoopKind::nesting;
    Tree context;  // holes @X, or @X1 and @X2
    Tree prefix;   // C_0 with hole @X
    int la0 = -1;  // look-ahead of @X1 (ML-nesting only)
    int la = -1;   // look-ahead of @X or @X2
    int q0 = -1;
    int q = -1;
    int i = 0;  // argument of <q,X> (or <q,X2>) that nests
    int j = 0;  // parameter of q0 shared with it; 0 when q0's call itself sits there

    // Nesting: C_0[C^k[t]].  ML-nesting: C_0[C(...C(C(t0,t),t)...,t)] with
    // k copies of C.
    Tree instance(int k, const Tree& t, const Tree& t0 = Tree()) const;
};

// The conditions of the definitions, checked on provisional outputs.
bool is_nesting_loop(const Mtt& m, const GeneratorLoop& loop);
bool is_ml_nesting_loop(const Mtt& m, const GeneratorLoop& loop);

// A context C_0 with hole @X such that <q,@X> occurs in M-hat(C_0[@X]) when
// @X has look-ahead p; absent when (q,p) is not reachable.
std::optional<Tree> call_context(const Mtt& m, int q, int p);

struct NestingAnalysis {
    bool finite = true;
    long bound = 0;  // nesting bound when finite
    std::size_t abstractions = 0;
    std::size_t nodes = 0;
    // Contexts read off a pumping cycle.  The followed hole is @hole with
    // look-ahead `la`; any other hole is a look-ahead mark.
    struct Cycle {
        Tree context;
        int la = -1;
    };
    std::vector<Cycle> cycles;
};

// Decides finite-nesting (multi_leaf = false) or finite-ML-nesting.
NestingAnalysis analyze_nesting(const Mtt& m, bool multi_leaf);

// Preconditions: m depth-proper.
std::optional<GeneratorLoop> find_nesting_loop(const Mtt& m);
std::optional<GeneratorLoop> find_ml_nesting_loop(const Mtt& m);

// An input family along the loop whose output height grows faster than
// any linear function of input size (nesting) or height (ML-nesting):
// the loop instance with k copies, filled with a tree in L_p whose tracked
// parameter sits at depth >= k.
Tree pumped_input(const Mtt& m, const GeneratorLoop& loop, int k);

// ---- decisions ----

struct DecisionReport {
    bool verdict = true;
    long nesting_bound = 0;  // b
    bool bound_exact = true;  // false: b measured on small inputs
    int rhs_height = 0;      // c
    // height(M(t)) <= factor * size(t) (LSHI) or * height(t) (LHI).
    long factor = 0;
    std::optional<GeneratorLoop> loop;
    int iterations = 0;
    Mtt normalized;
    double normalize_seconds = 0;
    double decide_seconds = 0;
};

DecisionReport decide_lshi(const Mtt& m, int max_iters = 32);
DecisionReport decide_lhi(const Mtt& m, int max_iters = 32);

}  // namespace mttlab
