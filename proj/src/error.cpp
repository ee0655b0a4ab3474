#include "semaxis/error.hpp"

namespace semaxis {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::invalid_input: return "invalid-input";
        case ErrorKind::undefined_correlation: return "undefined-correlation";
        case ErrorKind::rank_deficient: return "rank-deficient";
        case ErrorKind::convergence: return "convergence";
        case ErrorKind::out_of_vocabulary: return "out-of-vocabulary";
        case ErrorKind::not_found: return "not-found";
        case ErrorKind::label_mismatch: return "label-mismatch";
        case ErrorKind::bad_magic: return "bad-magic";
        case ErrorKind::version_mismatch: return "version-mismatch";
        case ErrorKind::truncated: return "truncated";
        case ErrorKind::dim_inconsistency: return "dim-inconsistency";
        case ErrorKind::duplicate_name: return "duplicate-name";
        case ErrorKind::parse: return "parse";
        case ErrorKind::io: return "io";
        case ErrorKind::aggregate: return "aggregate";
    }
    return "unknown";
}

}  // namespace semaxis
