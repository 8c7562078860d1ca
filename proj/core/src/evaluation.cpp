#include "vprsnn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "vprsnn/assignment.hpp"
#include "vprsnn/error.hpp"

namespace vprsnn {

namespace {

double global_max(const Matrix<double>& m)
{
    if (m.empty()) {
        return 0.0;
    }
    return *std::max_element(m.data().begin(), m.data().end());
}

// Shortest decimal that round-trips the double.
std::string format_double(double v)
{
    return nlohmann::json(v).dump();
}

}  // namespace

DistanceMatrix to_distance(const Matrix<double>& scores)
{
    const double top = global_max(scores);
    DistanceMatrix d(scores.rows(), scores.cols());
    for (std::size_t i = 0; i < scores.data().size(); ++i) {
        d.data()[i] = top - scores.data()[i];
    }
    return d;
}

Matrix<double> score_shares(const Matrix<double>& scores)
{
    Matrix<double> out = scores;
    for (std::size_t q = 0; q < out.rows(); ++q) {
        auto row = out.row(q);
        double total = 0.0;
        for (auto v : row) {
            total += v;
        }
        if (total > 0.0) {
            for (auto& v : row) {
                v /= total;
            }
        }
    }
    return out;
}

std::vector<Prediction> predictions_from_scores(const Matrix<double>& scores)
{
    const auto shares = score_shares(scores);
    std::vector<Prediction> out(scores.rows());
    for (std::size_t q = 0; q < scores.rows(); ++q) {
        const auto best = argmax(scores.row(q));
        out[q] = {best, scores.cols() == 0 ? 0.0 : shares(q, best)};
    }
    return out;
}

std::vector<Prediction> predictions_from_distances(const DistanceMatrix& distances)
{
    const double top = global_max(distances);
    std::vector<Prediction> out(distances.rows());
    for (std::size_t q = 0; q < distances.rows(); ++q) {
        auto row = distances.row(q);
        std::size_t best = 0;
        for (std::size_t r = 1; r < row.size(); ++r) {
            if (row[r] < row[best]) {
                best = r;
            }
        }
        out[q] = {best, row.empty() ? 0.0 : top - row[best]};
    }
    return out;
}

PrCurve pr_curve(std::span<const Prediction> predictions, std::span<const std::size_t> truth)
{
    if (predictions.empty()) {
        throw ValidationError("pr_curve: no predictions");
    }
    if (predictions.size() != truth.size()) {
        throw ValidationError("pr_curve: " + std::to_string(predictions.size()) +
                              " predictions but " + std::to_string(truth.size()) +
                              " ground-truth labels");
    }
    const std::size_t n = predictions.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return predictions[a].confidence > predictions[b].confidence;
    });

    PrCurve curve;
    std::size_t accepted = 0;
    std::size_t correct = 0;
    for (std::size_t k = 0; k < n;) {
        const double c = predictions[order[k]].confidence;
        while (k < n && predictions[order[k]].confidence == c) {
            const auto q = order[k];
            ++accepted;
            correct += predictions[q].label == truth[q] ? 1 : 0;
            ++k;
        }
        curve.points.push_back({static_cast<double>(correct) / static_cast<double>(n),
                                static_cast<double>(correct) / static_cast<double>(accepted)});
    }

    for (const auto& p : curve.points) {
        if (p.precision == 1.0) {
            curve.r_at_100p = std::max(curve.r_at_100p, p.recall);
        }
    }
    curve.p_at_100r = curve.points.back().precision;

    double area = curve.points.front().recall * curve.points.front().precision;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const auto& a = curve.points[k - 1];
        const auto& b = curve.points[k];
        area += (b.recall - a.recall) * (a.precision + b.precision) / 2.0;
    }
    curve.auc = area;
    return curve;
}

double sad_distance(const ImageGray& query, const ImageGray& reference)
{
    if (query.width != reference.width || query.height != reference.height) {
        throw ValidationError("sad_distance: image sizes differ (" + std::to_string(query.width) +
                              "x" + std::to_string(query.height) + " vs " +
                              std::to_string(reference.width) + "x" +
                              std::to_string(reference.height) + ")");
    }
    if (query.data.empty()) {
        return 0.0;
    }
    std::uint64_t total = 0;
    for (std::size_t p = 0; p < query.data.size(); ++p) {
        total += static_cast<std::uint64_t>(
            std::abs(static_cast<int>(query.data[p]) - static_cast<int>(reference.data[p])));
    }
    return static_cast<double>(total) / static_cast<double>(query.data.size());
}

DistanceMatrix sequence_aggregate(const DistanceMatrix& distances, std::size_t length)
{
    if (length == 0) {
        throw ValidationError("sequence_aggregate: sequence length must be >= 1");
    }
    DistanceMatrix out(distances.rows(), distances.cols());
    for (std::size_t q = 0; q < distances.rows(); ++q) {
        for (std::size_t r = 0; r < distances.cols(); ++r) {
            const std::size_t window = std::min({length, q + 1, r + 1});
            double sum = 0.0;
            for (std::size_t k = 0; k < window; ++k) {
                sum += distances(q - k, r - k);
            }
            out(q, r) = sum / static_cast<double>(window);
        }
    }
    return out;
}

double top1_accuracy(std::span<const Prediction> predictions, std::span<const std::size_t> truth)
{
    if (predictions.empty() || predictions.size() != truth.size()) {
        throw ValidationError("top1_accuracy: predictions and truth must be non-empty and aligned");
    }
    std::size_t hits = 0;
    for (std::size_t q = 0; q < predictions.size(); ++q) {
        hits += predictions[q].label == truth[q] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

std::string pr_curve_csv(const PrCurve& curve)
{
    std::string out = "recall,precision\n";
    for (const auto& p : curve.points) {
        out += format_double(p.recall) + "," + format_double(p.precision) + "\n";
    }
    return out;
}

std::string pr_summary_json(const PrCurve& curve)
{
    nlohmann::json j;
    j["auc"] = curve.auc;
    j["r_at_100p"] = curve.r_at_100p;
    j["p_at_100r"] = curve.p_at_100r;
    return j.dump(2) + "\n";
}

std::string matrix_csv(const Matrix<double>& m)
{
    std::string out;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c != 0) {
                out += ',';
            }
            out += format_double(m(r, c));
        }
        out += '\n';
    }
    return out;
}

ImageGray distance_heatmap(const DistanceMatrix& distances)
{
    ImageGray img(static_cast<int>(distances.cols()), static_cast<int>(distances.rows()));
    if (distances.empty()) {
        return img;
    }
    const auto [lo_it, hi_it] = std::minmax_element(distances.data().begin(), distances.data().end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    if (range <= 0.0) {
        return img;
    }
    for (std::size_t p = 0; p < distances.data().size(); ++p) {
        img.data[p] = to_pixel((distances.data()[p] - lo) / range * 255.0);
    }
    return img;
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

}  // namespace vprsnn
