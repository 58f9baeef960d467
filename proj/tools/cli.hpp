#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mttlab/lsoi.hpp"
#include "mttlab/nesting.hpp"
#include "mttlab/pout.hpp"

namespace mttlab::cli {

// Exit codes.
constexpr int ok = 0;
constexpr int usage = 1;
constexpr int invalid_input = 2;

// args excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Report payloads shared by the CLI and the tests.
nlohmann::json decision_json(const DecisionReport& r, const std::string& property);
nlohmann::json loop_json(const Mtt& m, const GeneratorLoop& loop);
nlohmann::json pout_json(const Mtt& m, int q, int l, int p, const PoutResult& r);
nlohmann::json profile_json(const std::string& kind, const Mtt& m, const std::vector<Tree>& inputs);

// Expands `a^N(e)` style patterns; each `sym^N(...)` is unfolded n times.
Tree expand_pattern(const std::string& pattern, int n);

}  // namespace mttlab::cli
