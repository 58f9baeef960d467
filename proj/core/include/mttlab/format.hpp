#pragma once

// Line-oriented transducer file format.
//
//   // comment
//   name NEST2
//   input a/1 e/0
//   output b/1 c/0
//   lookahead p                     (optional; default is one state "p")
//   a(p) -> p                       (transitions follow the lookahead line)
//   e -> p
//   states q0/0 q/1
//   initial q0
//   q0, a(x1) -> <q,x1>(c)
//   q, a(x1:p) (y1) -> <q,x1>(<q,x1>(y1))
//   q, e (y1) -> b(y1)
//
// A variable without ":state" is accepted only when the look-ahead has a
// single state.  Duplicate rule keys are kept out of the transducer and
// reported by validate() as determinism violations.

#include <string>
#include <string_view>

#include "mttlab/mtt.hpp"

namespace mttlab {

// Throws SyntaxError (line/column) on malformed input.
Mtt parse_mtt(std::string_view text);
Mtt load_mtt(const std::string& path);

// Canonical text; parse_mtt(print_mtt(m)) reproduces m.
std::string print_mtt(const Mtt& m);
void save_mtt(const Mtt& m, const std::string& path);

}  // namespace mttlab
