#pragma once

// Removal of improper state calls and the depth-proper normal form.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mttlab/mtt.hpp"
#include "mttlab/pout.hpp"

namespace mttlab {

// A helper state (p, r, t, u): computes M_r(s)/u for s with refined form t
// at look-ahead p.  Its parameters are the indices of the set leaf t/u in
// increasing order, renumbered from 1.
struct HelperState {
    int la;
    int state;
    Tree form;
    Path hole;
    std::vector<int> selection;
    std::string name;
};

struct PiResult {
    Mtt mtt;
    std::vector<HelperState> helpers;
};

// The one-round construction.  Look-ahead states are the reachable pairs
// (p, phi); states are the original ones plus helpers, restricted to those
// reachable from the initial state.
PiResult build_pi(const Mtt& m);

// Replaces F-calls of `rhs` by the children's forms, with helper calls at
// set leaves.  `helper_name(p, r, t, u)` names the helper state.
Tree theta_subst(const Mtt& m, PoutAnalysis& analysis, const Tree& rhs,
                 const std::vector<int>& children,
                 const std::function<std::string(int, int, const Tree&, const Path&)>& helper_name);

struct DepthProperCheck {
    bool proper = true;
    // First violating (q, l, p) when not proper.
    int state = -1;
    int param = 0;
    int la = -1;
};
DepthProperCheck is_depth_proper(const Mtt& m);

struct NormalizeTrace {
    std::vector<std::string> rounds;  // file text plus F tables per round
};

struct NormalizeResult {
    Mtt mtt;
    int iterations = 0;
};

// Iterates build_pi until the transducer is depth-proper.  Throws
// iteration_cap_exceeded after max_iters rounds.
NormalizeResult depth_proper(const Mtt& m, int max_iters = 32, NormalizeTrace* trace = nullptr);

// "F_p(q) = {1,2}" lines for every p and q with nonempty F_p(q).
std::string describe_F(const Mtt& m, PoutAnalysis& analysis);

}  // namespace mttlab
