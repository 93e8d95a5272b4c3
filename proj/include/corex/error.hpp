#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace corex {

enum class ErrorCode {
    duplicate_id,
    io,
    format,
    unknown_concept,
    inconsistent_theory,
    disconnected,
    dimension_mismatch,
    instance_mismatch,
    render,
    parse,
    unknown_sample,
    empty_positives,
    invalid_input,
    oracle,
    invalid_clause,
    config,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. The code identifies the error kind;
/// `stage` is filled in by the pipeline driver when the error crosses a stage
/// boundary.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string stage = {});

    ErrorCode code() const noexcept { return code_; }
    const std::string& stage() const noexcept { return stage_; }

    Error with_stage(std::string stage) const;

private:
    ErrorCode code_;
    std::string stage_;
    std::string detail_;
};

}  // namespace corex
