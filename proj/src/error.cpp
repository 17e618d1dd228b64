#include "tsrag/error.hpp"

namespace tsrag {

const char* to_string(ErrorCategory cat) {
    switch (cat) {
        case ErrorCategory::IO: return "IO";
        case ErrorCategory::FORMAT: return "FORMAT";
        case ErrorCategory::DIM_MISMATCH: return "DIM_MISMATCH";
        case ErrorCategory::HASH_MISMATCH: return "HASH_MISMATCH";
        case ErrorCategory::LEAKAGE: return "LEAKAGE";
        case ErrorCategory::NUMERIC: return "NUMERIC";
    }
    return "UNKNOWN";
}

} // namespace tsrag
