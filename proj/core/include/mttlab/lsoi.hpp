#pragma once

// Distinct-subtree growth: the equivalence gadget and empirical profiles.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mttlab/mtt.hpp"

namespace mttlab {

struct GadgetNames {
    std::string a = "a";  // new input symbol
    std::string f = "f";  // new binary output symbol
    std::string e = "e";  // new leaf
    std::string q0 = "q0";
    std::string q = "q";
    // Renamed states of the second transducer (old -> new).
    std::map<std::string, std::string> renamed;
};

// The transducer that is of LSOI iff M1 = M2.  Both inputs must share
// their alphabets and have trivial look-ahead.  The result is deleting.
Mtt build_gadget(const Mtt& m1, const Mtt& m2, GadgetNames* names = nullptr);

enum class LsoiHint { linear_consistent, super_linear };
const char* to_string(LsoiHint hint);

struct LsoiSample {
    Tree input;
    std::uint64_t input_size = 0;
    std::uint64_t distinct_subtrees = 0;
};

struct LsoiProfile {
    std::vector<LsoiSample> samples;
    // Least squares: count ~ intercept + slope * size.
    double slope = 0;
    double intercept = 0;
    // max |count - fit| / count.
    double residual_ratio = 0;
    // Largest count / size.
    double max_ratio = 0;
    LsoiHint hint = LsoiHint::linear_consistent;
};

LsoiProfile profile_lsoi(const Mtt& m, const std::vector<Tree>& inputs);

// Smallest input (by size, then printed form) with M1(s) != M2(s).
std::optional<Tree> sampled_equivalence(const Mtt& m1, const Mtt& m2, std::size_t size_budget);

}  // namespace mttlab
