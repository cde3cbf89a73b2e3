#ifndef GPI_ERRORS_HPP
#define GPI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gpi {

enum class ErrorCode {
    SYNTAX,
    UNKNOWN_SYMBOL,
    ARITY,
    DUPLICATE,
    SORT,
    FREE_VAR,
    NO_SSA,
    UNBOUND,
    NOT_APPLICABLE,
    EXPLOSION,
    PROB_MASS,
    PARTITION,
    NO_ACTION,
    EMPTY_EXAMPLES,
    NO_BINDER,
    UNCOVERED_STATE,
    IO,
};

const char *error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &message);
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string &message);

}

#endif
