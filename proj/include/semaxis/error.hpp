#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semaxis {

enum class ErrorKind {
    invalid_input,
    undefined_correlation,
    rank_deficient,
    convergence,
    out_of_vocabulary,
    not_found,
    label_mismatch,
    bad_magic,
    version_mismatch,
    truncated,
    dim_inconsistency,
    duplicate_name,
    parse,
    io,
    aggregate,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure in the toolkit is reported through this type; callers switch
// on kind() when they need to tell failure modes apart.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) throw Error(kind, message);
}

}  // namespace semaxis
