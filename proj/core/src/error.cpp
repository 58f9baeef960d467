#include "mttlab/error.hpp"

namespace mttlab {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::path_out_of_range: return "PathOutOfRange";
    case ErrorCode::non_nullary_symbol: return "NonNullarySymbol";
    case ErrorCode::param_out_of_arity: return "ParamOutOfArity";
    case ErrorCode::unknown_symbol: return "UnknownSymbol";
    case ErrorCode::syntax_error: return "SyntaxError";
    case ErrorCode::invalid_transducer: return "InvalidTransducer";
    case ErrorCode::not_nondeleting: return "NotNondeleting";
    case ErrorCode::not_applicable: return "NotApplicable";
    case ErrorCode::infinite_pout: return "InfinitePout";
    case ErrorCode::missing_phi: return "MissingPhi";
    case ErrorCode::iteration_cap_exceeded: return "IterationCapExceeded";
    case ErrorCode::alphabet_mismatch: return "AlphabetMismatch";
    case ErrorCode::internal: return "Internal";
    }
    return "Unknown";
}

}  // namespace mttlab
