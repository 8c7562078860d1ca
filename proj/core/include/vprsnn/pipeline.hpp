#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "vprsnn/assignment.hpp"
#include "vprsnn/checkpoint.hpp"
#include "vprsnn/config.hpp"
#include "vprsnn/data.hpp"
#include "vprsnn/evaluation.hpp"

namespace vprsnn {

using LogFn = std::function<void(std::string_view)>;

struct RunOptions
{
    unsigned threads = 1;
    LogFn log;
};

/// Resize to the configured input size, then patch-normalize.
ImageGray preprocess(const ImageGray& img, const RunConfig& cfg);

/// Unsupervised training on the reference images followed by a frozen
/// labeling pass that fills the spike-count matrix and assignments.
///
/// Throws ValidationError on invalid config or data, and Error if the
/// simulation state becomes non-finite.
Checkpoint train(const Dataset& reference, const RunConfig& cfg, const RunOptions& opts = {});

/// Presents each preprocessed image once with plasticity off, starting from
/// a fresh fast state, and returns spike counts (images x neurons).
/// `phase` separates the random streams of different passes.
Matrix<double> frozen_spike_counts(const Checkpoint& ckpt, std::span<const ImageGray> images,
                                   std::uint64_t phase, const RunOptions& opts = {});

struct QueryResult
{
    Matrix<double> spike_counts;  ///< queries x neurons
    MatchScoreTable table;
    std::vector<Prediction> predictions;
    /// Queries that produced no output spikes.
    std::vector<bool> low_confidence;
};

/// Spike counts for every query image.
Matrix<double> query_spike_counts(const Checkpoint& ckpt, const Dataset& queries,
                                  const RunOptions& opts = {});

/// Scores precomputed query spike counts under `scheme`.
QueryResult decode(const Checkpoint& ckpt, Matrix<double> spike_counts, Scheme scheme);

QueryResult query(const Checkpoint& ckpt, const Dataset& queries, Scheme scheme,
                  const RunOptions& opts = {});

/// Query-by-reference SAD baseline. Scores are max(D) - D over the
/// reference labels, where D takes the closest reference traverse.
QueryResult sad_baseline(const Dataset& reference, const Dataset& queries, const RunConfig& cfg);

/// Predictions plus the score matrix they came from.
struct PredictionSet
{
    std::vector<Prediction> predictions;
    Matrix<double> scores;
};

/// CSV with header `query,predicted,confidence,score_0,...`.
std::string predictions_csv(const PredictionSet& set);
PredictionSet parse_predictions_csv(const std::string& text);
PredictionSet read_predictions(const std::filesystem::path& path);

/// Computes the PR curve and writes `pr_curve.csv`, `summary.json`,
/// `distance.pgm` and `distance.csv` into `out_dir`.
PrCurve evaluate(const PredictionSet& set, std::span<const std::size_t> truth,
                 const std::filesystem::path& out_dir);

}  // namespace vprsnn
