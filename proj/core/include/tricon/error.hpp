#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tricon {

enum class Errc {
    MalformedRecord,
    DuplicateId,
    IoFailure,
    NoBox,
    InvalidBox,
    ProviderUnavailable,
    EmptyText,
    NoComponents,
    InvalidRatios,
    UnparseableOutput,
    EmptyCorpus,
    NoNgrams,
    ModelError,
    ConfigError,
    SeedDatasetError,
    RankFailure,
    ShapeMismatch,
    NonPositiveScale,
    Divergence,
    EmptyTestSet,
    InvalidArgument,
};

std::string_view to_string(Errc code) noexcept;

/// Single exception type for the library. `line()` is 1-based and 0 when the
/// error is not tied to an input line.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message, std::size_t line = 0);

    Errc code() const noexcept { return code_; }
    std::size_t line() const noexcept { return line_; }

private:
    Errc code_;
    std::size_t line_;
};

}  // namespace tricon
