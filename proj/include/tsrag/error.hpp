#ifndef TSRAG_ERROR_HPP
#define TSRAG_ERROR_HPP

#include <stdexcept>
#include <string>

namespace tsrag {

// Unified error taxonomy. The CLI maps each category to a distinct exit code
// and a single-line machine-parsable message.
enum class ErrorCategory {
    IO,            // missing/unreadable/unwritable files
    FORMAT,        // bad magic, version mismatch, truncation, unparsable input
    DIM_MISMATCH,  // tensor/window shape disagreements
    HASH_MISMATCH, // artifact built against a different encoder
    LEAKAGE,       // KB overlaps evaluation windows
    NUMERIC        // NaN/Inf where finite values are required
};

const char* to_string(ErrorCategory cat);

class TsragError : public std::runtime_error {
public:
    TsragError(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const { return category_; }

private:
    ErrorCategory category_;
};

} // namespace tsrag

#endif
