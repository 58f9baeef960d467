#pragma once

// lcop forms, pout sets and the finiteness analysis behind F_p and Phi_p.
//
// Parameter sets are bit masks: bit j stands for y_j.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "mttlab/mtt.hpp"

namespace mttlab {

using ParamMask = std::uint64_t;

ParamMask mask_of(const std::vector<int>& params);
std::vector<int> params_in(ParamMask mask);

// The lcop of s with respect to Y': maximal Y'-free subtrees become $.
Tree lcop(const Tree& s, ParamMask yp);

// Like lcop, but a pruned subtree becomes the set leaf of all parameters
// it contains.  Set leaves already present count as Y'-free.
Tree lcop_refined(const Tree& s, ParamMask yp);

// Replaces every set leaf by $.
Tree erase_sets(const Tree& t);

// Brute force: lcop of M_q(s) for all s in L_p with size <= budget.
std::vector<Tree> pout_enumerate(const Mtt& m, int q, ParamMask yp, int p, std::size_t budget);

// The same over one shared enumeration, for many queries with budgets up
// to max_size.
class PoutEnumerator {
public:
    PoutEnumerator(const Mtt& m, std::size_t max_size);
    std::vector<Tree> forms(int q, ParamMask yp, int p, std::size_t budget);

private:
    struct KeyHash {
        std::size_t operator()(const std::pair<const void*, ParamMask>& k) const {
            return std::hash<const void*>{}(k.first) ^ (k.second * 0x9e3779b97f4a7c15ull);
        }
    };
    Tree lcop_cached(const Tree& s, ParamMask yp);

    const Mtt& m_;
    Evaluator ev_;
    std::size_t max_size_;
    std::vector<std::vector<Tree>> members_;  // by state, sorted by size
    std::unordered_map<std::pair<const void*, ParamMask>, Tree, KeyHash> lcop_;
};

// Pumpable witness for an infinite pout: with H the hole leaf,
// prefix[cycle^k[base]] lies in L_la and the tracked parameter occurs at
// depth >= k in the output of the tracked state.
struct PoutWitness {
    int la = -1;
    Tree prefix;
    Tree cycle;
    Tree base;
    Tree pumped(int k) const;
};

Symbol hole_symbol();
// Plugs `filler` into the hole of `context`.
Tree plug(const Tree& context, const Tree& filler);

struct PoutResult {
    bool finite = true;
    std::vector<Tree> forms;  // canonical order; only when finite
    std::optional<PoutWitness> witness;
};

// Exact analysis of a nondeleting transducer.
class PoutAnalysis {
public:
    explicit PoutAnalysis(const Mtt& m);
    const Mtt& mtt() const { return m_; }

    // ---- single-parameter finiteness ----
    bool finite(int q, int l, int p) const;
    PoutResult pout_finite(int q, int l, int p);
    ParamMask F(int p, int q) const { return fmask_[p][q]; }
    bool in_F1(int p, int q) const { return fmask_[p][q] != 0; }

    // ---- reachable refined forms ----
    struct PhiState {
        int la;
        // phi[q] is the refined lcop of M_q(s) w.r.t. F_p(q); invalid Tree
        // for states outside F^1_p.
        std::vector<Tree> phi;
        Tree witness;
    };
    const std::vector<PhiState>& phi_states();
    // Index of h'_sigma(children).
    int phi_next(std::size_t symbol, const std::vector<int>& children);

    // pout((q,Y'),p) and its refined variant; throws infinite_pout if
    // Y' is not contained in F_p(q).
    std::vector<Tree> pout(int q, ParamMask yp, int p);
    std::vector<Tree> pout_f(int q, ParamMask yp, int p);

    // The refined lcop of the right-hand side after substituting the
    // children's forms for their F-calls (the Theta' substitution).
    Tree theta_prime(const Tree& rhs, const std::vector<int>& children, ParamMask keep);

    // Enriched states (p, Z) with Z[q] = {l | M_q(s) = y_l}.
    struct Enriched {
        int la;
        std::vector<ParamMask> z;
        Tree witness;
    };
    const std::vector<Enriched>& enriched() const { return enriched_; }

    static constexpr std::size_t state_cap = 20000;

private:
    struct Edge {
        int to;
        bool positive;
        std::size_t symbol;
        std::vector<int> children;  // enriched indices
        int child;                  // 0-based
    };
    int node_id(int q, int e, int l) const;
    void build_enriched();
    void build_graph();
    void build_phi();
    Tree context_of(const Edge& edge) const;

    const Mtt& m_;
    std::vector<Enriched> enriched_;
    std::map<std::pair<int, std::vector<ParamMask>>, int> enriched_index_;
    std::vector<std::vector<Edge>> edges_;
    std::vector<char> infinite_node_;
    std::vector<int> scc_;
    std::vector<char> scc_pumping_;
    std::vector<std::vector<ParamMask>> fmask_;  // [p][q]
    int max_rank_ = 0;

    bool phi_built_ = false;
    std::vector<PhiState> phi_states_;
    std::map<std::pair<int, std::vector<const void*>>, int> phi_index_;
    std::map<std::pair<std::size_t, std::vector<int>>, int> phi_trans_;
};

// Convenience wrappers (each builds a fresh analysis).
PoutResult pout_finite(const Mtt& m, int q, int l, int p);

struct FSets {
    std::vector<std::pair<int, int>> F;  // (q, l)
    std::vector<int> F1;
    std::map<int, ParamMask> F_of;
};
FSets compute_F(const Mtt& m, int p);

std::vector<Tree> pout_f(const Mtt& m, int q, ParamMask yp, int p);

using ParamMap = std::map<int, Tree>;
// Product of pout_f((r,F_p(r)),p) over r in F^1_p.
std::vector<ParamMap> phi_set(const Mtt& m, int p);

}  // namespace mttlab
