#include "gpi/errors.hpp"

namespace gpi {

const char *error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::SYNTAX: return "E_SYNTAX";
    case ErrorCode::UNKNOWN_SYMBOL: return "E_UNKNOWN_SYMBOL";
    case ErrorCode::ARITY: return "E_ARITY";
    case ErrorCode::DUPLICATE: return "E_DUPLICATE";
    case ErrorCode::SORT: return "E_SORT";
    case ErrorCode::FREE_VAR: return "E_FREE_VAR";
    case ErrorCode::NO_SSA: return "E_NO_SSA";
    case ErrorCode::UNBOUND: return "E_UNBOUND";
    case ErrorCode::NOT_APPLICABLE: return "E_NOT_APPLICABLE";
    case ErrorCode::EXPLOSION: return "E_EXPLOSION";
    case ErrorCode::PROB_MASS: return "E_PROB_MASS";
    case ErrorCode::PARTITION: return "E_PARTITION";
    case ErrorCode::NO_ACTION: return "E_NO_ACTION";
    case ErrorCode::EMPTY_EXAMPLES: return "E_EMPTY_EXAMPLES";
    case ErrorCode::NO_BINDER: return "E_NO_BINDER";
    case ErrorCode::UNCOVERED_STATE: return "E_UNCOVERED_STATE";
    case ErrorCode::IO: return "E_IO";
    }
    return "E_UNKNOWN";
}

Error::Error(ErrorCode code, const std::string &message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

void raise(ErrorCode code, const std::string &message) {
    throw Error(code, message);
}

}
