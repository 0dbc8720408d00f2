#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "tricon/consistency.hpp"
#include "tricon/similarity.hpp"
#include "tricon/types.hpp"

namespace tricon::fixtures {

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

/// Valid triplets with awkward text: quotes, newlines, tabs, non-ASCII.
std::vector<Triplet> random_triplets(std::size_t n, std::uint64_t seed);

/// Triplets of every category with hand-built reconstructions: faithful,
/// perturbed, templated, empty, failed, unparseable boxes and repeated
/// score values.
struct ScoringFixture {
    std::vector<Triplet> triplets;
    std::vector<Reconstruction> reconstructions;
};
ScoringFixture scoring_fixture(std::size_t n, std::uint64_t seed);

/// Table-backed mock corpus: `faithful` images whose reconstructions
/// reproduce the generated pair and `corrupted` images whose do not,
/// spread round-robin over the five categories.
struct LoopFixture {
    std::vector<Triplet> seed_dataset;
    std::vector<std::string> images;
    std::vector<bool> faithful;      ///< per image
    std::vector<QaType> types;       ///< per image
    std::string model_table_json;
};
LoopFixture loop_fixture(std::size_t faithful, std::size_t corrupted, std::size_t seed_size);

/// Token vectors are one-hot by token identity; the sentence vector is
/// one-hot by the first token.
class OneHotProvider final : public EmbeddingProvider {
public:
    explicit OneHotProvider(std::size_t dim = 512) : dim_(dim) {}
    Vector sentence_vector(std::string_view text) override;
    std::vector<Vector> token_vectors(std::string_view text) override;
    bool thread_safe() const noexcept override { return false; }

private:
    Vector one_hot(const std::string& token);
    std::size_t dim_;
    std::map<std::string, std::size_t> ids_;
};

}  // namespace tricon::fixtures
