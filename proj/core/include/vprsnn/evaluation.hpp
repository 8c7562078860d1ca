#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vprsnn/matrix.hpp"
#include "vprsnn/signal.hpp"

namespace vprsnn {

/// Queries x references; lower is a better match.
using DistanceMatrix = Matrix<double>;

struct PrPoint
{
    double recall = 0.0;
    double precision = 0.0;

    friend bool operator==(const PrPoint&, const PrPoint&) = default;
};

struct PrCurve
{
    std::vector<PrPoint> points;
    double auc = 0.0;
    double r_at_100p = 0.0;
    double p_at_100r = 0.0;
};

/// A predicted label with the confidence used to rank acceptances.
struct Prediction
{
    std::size_t label = 0;
    double confidence = 0.0;
};

/// global_max(scores) - scores.
DistanceMatrix to_distance(const Matrix<double>& scores);

/// Each row divided by its sum; all-zero rows stay zero. Makes scores
/// comparable across queries whose totals differ.
Matrix<double> score_shares(const Matrix<double>& scores);

/// Argmax of each score row (ties to the lowest label); the confidence is
/// the winner's share of the row total.
std::vector<Prediction> predictions_from_scores(const Matrix<double>& scores);

/// Argmin of each distance row; confidence is global_max(D) minus the row
/// minimum so that it ranks like a score.
std::vector<Prediction> predictions_from_distances(const DistanceMatrix& distances);

/// Threshold sweep over descending confidence with exact-match ground truth.
///
/// Queries sharing a confidence are accepted together. Recall is measured
/// against all queries. AUC is the trapezoidal area over the sweep points,
/// extended flat from recall 0 at the first point's precision.
/// Throws ValidationError on empty or mismatched input.
PrCurve pr_curve(std::span<const Prediction> predictions, std::span<const std::size_t> truth);

/// Mean absolute pixel difference. Throws ValidationError on size mismatch.
double sad_distance(const ImageGray& query, const ImageGray& reference);

/// Averages each entry with its L-1 predecessors along the diagonal,
/// shortening the window at the top/left borders.
DistanceMatrix sequence_aggregate(const DistanceMatrix& distances, std::size_t length);

/// Fraction of predictions whose label equals the truth.
double top1_accuracy(std::span<const Prediction> predictions, std::span<const std::size_t> truth);

/// `recall,precision` rows with a header line.
std::string pr_curve_csv(const PrCurve& curve);
/// {"auc": .., "p_at_100r": .., "r_at_100p": ..}
std::string pr_summary_json(const PrCurve& curve);
/// Row-per-query CSV of a matrix, full precision.
std::string matrix_csv(const Matrix<double>& m);
/// Min maps to 0, max to 255; a constant matrix maps to 0.
ImageGray distance_heatmap(const DistanceMatrix& distances);

/// Writes `text` to `path`, throwing IoError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace vprsnn
