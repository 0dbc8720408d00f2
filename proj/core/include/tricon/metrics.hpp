#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tricon/types.hpp"

namespace tricon {

/// Unique tokens over total tokens across the corpus.
/// Throws Error{EmptyCorpus} when the corpus has no tokens.
double ttr(std::span<const std::string> texts);

/// Unique n-grams over total n-grams; n-grams never cross text boundaries.
/// Throws Error{NoNgrams} when no text has n tokens, Error{InvalidArgument}
/// for n == 0.
double distinct_n(std::span<const std::string> texts, std::size_t n);

/// Fraction of records per category (only categories that occur).
/// Throws Error{EmptyCorpus}.
std::map<QaType, double> type_distribution(std::span<const Triplet> triplets);

enum class TextField { Question, Answer, Both };

/// Pulls the texts a diversity report is computed over. Both yields the
/// question and the answer of each record as separate texts.
std::vector<std::string> select_texts(std::span<const Triplet> triplets, TextField field);

struct DiversityReport {
    double ttr = 0.0;
    double distinct_2 = 0.0;
    std::size_t token_count = 0;
    std::map<QaType, std::size_t> type_histogram;
};

DiversityReport diversity_report(std::span<const Triplet> triplets, TextField field = TextField::Both);

/// Single-line JSON rendering with fixed key order.
std::string to_json(const DiversityReport& report);

}  // namespace tricon
