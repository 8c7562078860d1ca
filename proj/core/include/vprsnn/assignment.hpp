#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "vprsnn/matrix.hpp"
#include "vprsnn/snn.hpp"

namespace vprsnn {

/// Decoding schemes for turning query spike counts into per-label scores.
enum class Scheme
{
    standard,
    weighted,
    prob,
    weighted_prob,
};

/// Throws ValidationError for unknown names.
Scheme parse_scheme(std::string_view name);
std::string_view to_string(Scheme scheme) noexcept;

/// Labeling-pass spike totals, neurons x labels.
using SpikeCountMatrix = Matrix<double>;

/// One labeling-pass presentation.
struct LabeledRecord
{
    std::size_t label = 0;
    SpikeRecord record;
};

/// Sums spike records per (neuron, label).
///
/// The label count is one past the largest label seen; every label below
/// it must occur at least once and every record must have the same width.
SpikeCountMatrix build_counts(std::span<const LabeledRecord> records);

/// Neuron-to-label assignment learned from a SpikeCountMatrix.
struct AssignmentTable
{
    /// Argmax label per neuron; nullopt for neurons silent in every label.
    std::vector<std::optional<std::size_t>> label;
    /// Neurons whose argmax is each label.
    std::vector<std::vector<std::size_t>> members;
    /// Number of labels each neuron responded to.
    std::vector<std::size_t> omega;
    /// Per-(neuron, label) share of that neuron's labeling-pass spikes.
    Matrix<double> frac;

    std::size_t n_neurons() const noexcept { return label.size(); }
    std::size_t n_labels() const noexcept { return members.size(); }
    std::size_t n_assigned() const noexcept;
};

/// Argmax assignment; ties go to the lowest label, all-zero rows stay
/// unassigned.
AssignmentTable assign_standard(const SpikeCountMatrix& counts);

/// score[l] = sum of query counts over neurons assigned to l.
std::vector<double> score_standard(std::span<const double> query, const AssignmentTable& table);

/// Divides the count of every neuron that learned more than gamma * R labels
/// by the number of labels it learned. Neurons that learned nothing give 0.
std::vector<double> weight_involvement(std::span<const double> query,
                                       const AssignmentTable& table, double gamma,
                                       std::size_t n_labels);

/// Splits each neuron's count across its learned labels in proportion to
/// its labeling-pass response. Result is neurons x labels.
Matrix<double> weight_response_strength(std::span<const double> regularized,
                                        const AssignmentTable& table);

/// Per-label factor: labeling-pass spikes of the label's learners that also
/// fired for the query, over labeling-pass spikes of all its learners.
std::vector<double> silent_learner_factors(std::span<const double> query,
                                           const SpikeCountMatrix& counts);

/// Scales every label column of `split` by its silent-learner factor.
Matrix<double> penalize_silent(const Matrix<double>& split, std::span<const double> query,
                               const SpikeCountMatrix& counts);

/// Min-max normalization divided by the vector sum. Constant or all-zero
/// inputs give all zeros.
std::vector<double> probability_normalize(std::span<const double> values);

/// Per-label scores for one query under `scheme`.
std::vector<double> score(std::span<const double> query, const AssignmentTable& table,
                          const SpikeCountMatrix& counts, Scheme scheme, double gamma);

/// Index of the largest score; ties go to the lowest index. Empty input
/// gives 0.
std::size_t argmax(std::span<const double> scores) noexcept;

/// Scores for a batch of queries, queries x labels.
struct MatchScoreTable
{
    Matrix<double> scores;
    Scheme scheme = Scheme::standard;

    std::size_t n_queries() const noexcept { return scores.rows(); }
    std::size_t n_labels() const noexcept { return scores.cols(); }
};

/// Scores every row of `query_counts` (queries x neurons).
MatchScoreTable score_all(const Matrix<double>& query_counts, const AssignmentTable& table,
                          const SpikeCountMatrix& counts, Scheme scheme, double gamma);

}  // namespace vprsnn
