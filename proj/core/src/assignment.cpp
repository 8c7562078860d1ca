#include "vprsnn/assignment.hpp"

#include <algorithm>
#include <string>

#include "vprsnn/error.hpp"

namespace vprsnn {

Scheme parse_scheme(std::string_view name)
{
    if (name == "standard") return Scheme::standard;
    if (name == "weighted") return Scheme::weighted;
    if (name == "prob") return Scheme::prob;
    if (name == "weighted_prob") return Scheme::weighted_prob;
    throw ValidationError("unknown scheme '" + std::string(name) +
                          "' (expected standard, weighted, prob or weighted_prob)");
}

std::string_view to_string(Scheme scheme) noexcept
{
    switch (scheme) {
    case Scheme::standard: return "standard";
    case Scheme::weighted: return "weighted";
    case Scheme::prob: return "prob";
    case Scheme::weighted_prob: return "weighted_prob";
    }
    return "standard";
}

SpikeCountMatrix build_counts(std::span<const LabeledRecord> records)
{
    if (records.empty()) {
        throw ValidationError("build_counts: no labeling records");
    }
    const std::size_t n_neurons = records.front().record.counts.size();
    std::size_t n_labels = 0;
    for (const auto& r : records) {
        if (r.record.counts.size() != n_neurons) {
            throw ValidationError("build_counts: record width " +
                                  std::to_string(r.record.counts.size()) +
                                  " does not match K_P = " + std::to_string(n_neurons));
        }
        n_labels = std::max(n_labels, r.label + 1);
    }
    std::vector<bool> seen(n_labels, false);
    SpikeCountMatrix counts(n_neurons, n_labels, 0.0);
    for (const auto& r : records) {
        seen[r.label] = true;
        for (std::size_t i = 0; i < n_neurons; ++i) {
            counts(i, r.label) += r.record.counts[i];
        }
    }
    for (std::size_t l = 0; l < n_labels; ++l) {
        if (!seen[l]) {
            throw ValidationError("build_counts: label " + std::to_string(l) +
                                  " has no labeling presentation");
        }
    }
    return counts;
}

std::size_t AssignmentTable::n_assigned() const noexcept
{
    return static_cast<std::size_t>(
        std::count_if(label.begin(), label.end(), [](const auto& l) { return l.has_value(); }));
}

AssignmentTable assign_standard(const SpikeCountMatrix& counts)
{
    const std::size_t n = counts.rows();
    const std::size_t r = counts.cols();
    AssignmentTable table;
    table.label.assign(n, std::nullopt);
    table.members.assign(r, {});
    table.omega.assign(n, 0);
    table.frac = Matrix<double>(n, r, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = counts.row(i);
        double total = 0.0;
        for (std::size_t l = 0; l < r; ++l) {
            if (row[l] < 0.0) {
                throw ValidationError("assign_standard: negative spike count");
            }
            total += row[l];
            table.omega[i] += row[l] > 0.0 ? 1 : 0;
        }
        if (total <= 0.0) {
            continue;
        }
        const std::size_t best = argmax(row);
        table.label[i] = best;
        table.members[best].push_back(i);
        for (std::size_t l = 0; l < r; ++l) {
            table.frac(i, l) = row[l] / total;
        }
    }
    return table;
}

std::vector<double> score_standard(std::span<const double> query, const AssignmentTable& table)
{
    std::vector<double> out(table.n_labels(), 0.0);
    for (std::size_t l = 0; l < table.n_labels(); ++l) {
        for (auto m : table.members[l]) {
            out[l] += query[m];
        }
    }
    return out;
}

std::vector<double> weight_involvement(std::span<const double> query,
                                       const AssignmentTable& table, double gamma,
                                       std::size_t n_labels)
{
    const double limit = gamma * static_cast<double>(n_labels);
    std::vector<double> out(query.size(), 0.0);
    for (std::size_t i = 0; i < query.size(); ++i) {
        const auto omega = table.omega[i];
        if (omega == 0) {
            continue;
        }
        out[i] = static_cast<double>(omega) <= limit ? query[i]
                                                     : query[i] / static_cast<double>(omega);
    }
    return out;
}

Matrix<double> weight_response_strength(std::span<const double> regularized,
                                        const AssignmentTable& table)
{
    Matrix<double> out(table.n_neurons(), table.n_labels(), 0.0);
    for (std::size_t i = 0; i < table.n_neurons(); ++i) {
        for (std::size_t l = 0; l < table.n_labels(); ++l) {
            const double f = table.frac(i, l);
            if (f > 0.0) {
                out(i, l) = regularized[i] * f;
            }
        }
    }
    return out;
}

std::vector<double> silent_learner_factors(std::span<const double> query,
                                           const SpikeCountMatrix& counts)
{
    std::vector<double> fired(counts.cols(), 0.0);
    std::vector<double> all(counts.cols(), 0.0);
    for (std::size_t m = 0; m < counts.rows(); ++m) {
        const bool active = query[m] > 0.0;
        const auto row = counts.row(m);
        // Counts are non-negative, so adding non-learners changes nothing.
        for (std::size_t l = 0; l < row.size(); ++l) {
            all[l] += row[l];
        }
        if (active) {
            for (std::size_t l = 0; l < row.size(); ++l) {
                fired[l] += row[l];
            }
        }
    }
    std::vector<double> factor(counts.cols(), 0.0);
    for (std::size_t l = 0; l < factor.size(); ++l) {
        factor[l] = all[l] > 0.0 ? fired[l] / all[l] : 0.0;
    }
    return factor;
}

Matrix<double> penalize_silent(const Matrix<double>& split, std::span<const double> query,
                               const SpikeCountMatrix& counts)
{
    const auto factor = silent_learner_factors(query, counts);
    Matrix<double> out = split;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t l = 0; l < out.cols(); ++l) {
            out(i, l) *= factor[l];
        }
    }
    return out;
}

std::vector<double> probability_normalize(std::span<const double> values)
{
    std::vector<double> out(values.size(), 0.0);
    if (values.empty()) {
        return out;
    }
    double sum = 0.0;
    for (auto v : values) {
        sum += v;
    }
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    if (range <= 0.0 || sum == 0.0) {
        return out;
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = (values[i] - lo) / range / sum;
    }
    return out;
}

namespace {

// Per-label sums of a per-neuron vector over every neuron that learned the label.
std::vector<double> sum_over_learners(std::span<const double> per_neuron,
                                      const SpikeCountMatrix& counts)
{
    std::vector<double> out(counts.cols(), 0.0);
    for (std::size_t i = 0; i < counts.rows(); ++i) {
        const auto row = counts.row(i);
        const double v = per_neuron[i];
        for (std::size_t l = 0; l < row.size(); ++l) {
            out[l] += row[l] > 0.0 ? v : 0.0;
        }
    }
    return out;
}

// Involvement, response-strength and silent-learner weighting without
// materializing the neurons x labels matrices.
// visit(i, l, value) is called for every (neuron, label) pair; pairs the
// neuron never learned contribute zero.
template <typename Visit>
void for_each_weighted(std::span<const double> query, const AssignmentTable& table,
                       const SpikeCountMatrix& counts, double gamma, Visit&& visit)
{
    const auto regularized = weight_involvement(query, table, gamma, counts.cols());
    const auto factor = silent_learner_factors(query, counts);
    for (std::size_t i = 0; i < table.n_neurons(); ++i) {
        const auto frac = table.frac.row(i);
        for (std::size_t l = 0; l < frac.size(); ++l) {
            visit(i, l, regularized[i] * frac[l] * factor[l]);
        }
    }
}

}  // namespace

std::vector<double> score(std::span<const double> query, const AssignmentTable& table,
                          const SpikeCountMatrix& counts, Scheme scheme, double gamma)
{
    if (query.size() != counts.rows() || table.n_neurons() != counts.rows()) {
        throw ValidationError("score: query length " + std::to_string(query.size()) +
                              " does not match K_P = " + std::to_string(counts.rows()));
    }
    switch (scheme) {
    case Scheme::standard:
        return score_standard(query, table);
    case Scheme::prob: {
        const auto p = probability_normalize(query);
        return score_standard(p, table);
    }
    case Scheme::weighted: {
        std::vector<double> out(counts.cols(), 0.0);
        for_each_weighted(query, table, counts, gamma,
                          [&](std::size_t, std::size_t l, double v) { out[l] += v; });
        return out;
    }
    case Scheme::weighted_prob: {
        std::vector<double> totals(counts.rows(), 0.0);
        for_each_weighted(query, table, counts, gamma,
                          [&](std::size_t i, std::size_t, double v) { totals[i] += v; });
        const auto p = probability_normalize(totals);
        return sum_over_learners(p, counts);
    }
    }
    throw ValidationError("score: unknown scheme");
}

std::size_t argmax(std::span<const double> scores) noexcept
{
    std::size_t best = 0;
    for (std::size_t l = 1; l < scores.size(); ++l) {
        if (scores[l] > scores[best]) {
            best = l;
        }
    }
    return best;
}

MatchScoreTable score_all(const Matrix<double>& query_counts, const AssignmentTable& table,
                          const SpikeCountMatrix& counts, Scheme scheme, double gamma)
{
    MatchScoreTable out;
    out.scheme = scheme;
    out.scores = Matrix<double>(query_counts.rows(), counts.cols(), 0.0);
    for (std::size_t q = 0; q < query_counts.rows(); ++q) {
        const auto s = score(query_counts.row(q), table, counts, scheme, gamma);
        std::copy(s.begin(), s.end(), out.scores.row(q).begin());
    }
    return out;
}

}  // namespace vprsnn
