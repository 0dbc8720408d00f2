#include "tricon/error.hpp"

namespace tricon {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::MalformedRecord: return "MalformedRecord";
        case Errc::DuplicateId: return "DuplicateId";
        case Errc::IoFailure: return "IoFailure";
        case Errc::NoBox: return "NoBox";
        case Errc::InvalidBox: return "InvalidBox";
        case Errc::ProviderUnavailable: return "ProviderUnavailable";
        case Errc::EmptyText: return "EmptyText";
        case Errc::NoComponents: return "NoComponents";
        case Errc::InvalidRatios: return "InvalidRatios";
        case Errc::UnparseableOutput: return "UnparseableOutput";
        case Errc::EmptyCorpus: return "EmptyCorpus";
        case Errc::NoNgrams: return "NoNgrams";
        case Errc::ModelError: return "ModelError";
        case Errc::ConfigError: return "ConfigError";
        case Errc::SeedDatasetError: return "SeedDatasetError";
        case Errc::RankFailure: return "RankFailure";
        case Errc::ShapeMismatch: return "ShapeMismatch";
        case Errc::NonPositiveScale: return "NonPositiveScale";
        case Errc::Divergence: return "Divergence";
        case Errc::EmptyTestSet: return "EmptyTestSet";
        case Errc::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

namespace {
std::string decorate(Errc code, const std::string& message, std::size_t line) {
    std::string out{to_string(code)};
    if (line != 0) out += " at line " + std::to_string(line);
    out += ": ";
    out += message;
    return out;
}
}  // namespace

Error::Error(Errc code, const std::string& message, std::size_t line)
    : std::runtime_error(decorate(code, message, line)), code_(code), line_(line) {}

}  // namespace tricon
