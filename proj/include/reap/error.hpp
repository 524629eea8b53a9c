#pragma once

#include <stdexcept>
#include <string>

namespace reap {

enum class ErrorCode {
    InvalidArgument,
    EmptyText,
    EmptyCompletion,
    ProviderFailure,
    ProviderMismatch,
    DimensionMismatch,
    ZeroVector,
    UnparseableReflection,
    MixedKnowledgeTypes,
    IoFailure,
    SchemaVersionMismatch,
    CorruptRecord,
    DegenerateSplit,
    UnknownTask,
    NonPositiveBaseline,
    SingleCategory,
};

const char* error_code_name(ErrorCode code);

/// Library-wide exception. `retriable` is meaningful for provider
/// failures; `line` is the 1-based line number for record-level
/// file errors (0 when not applicable).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, bool retriable = false, long line = 0)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code),
          retriable_(retriable),
          line_(line) {}

    ErrorCode code() const noexcept { return code_; }
    bool retriable() const noexcept { return retriable_; }
    long line() const noexcept { return line_; }

private:
    ErrorCode code_;
    bool retriable_;
    long line_;
};

}  // namespace reap
