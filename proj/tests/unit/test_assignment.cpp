#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "vprsnn/assignment.hpp"
#include "vprsnn/error.hpp"
#include "vprsnn/random.hpp"

using namespace vprsnn;

namespace {

SpikeCountMatrix grid(const oracle::Grid& g)
{
    SpikeCountMatrix m(g.size(), g.empty() ? 0 : g.front().size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t l = 0; l < g[i].size(); ++l) {
            m(i, l) = g[i][l];
        }
    }
    return m;
}

LabeledRecord rec(std::size_t label, std::vector<std::uint32_t> counts)
{
    LabeledRecord r;
    r.label = label;
    for (auto c : counts) {
        r.record.total += c;
    }
    r.record.counts = std::move(counts);
    return r;
}

struct Instance
{
    oracle::Grid sr;
    std::vector<double> q;
    double gamma = 0.0;
};

// Small counts with plenty of zeros so silent neurons, ties and unfired
// learners all show up.
Instance random_instance(Rng& rng)
{
    Instance in;
    const std::size_t n = 1 + rng.below(10);
    const std::size_t r = 1 + rng.below(5);
    in.sr.assign(n, std::vector<double>(r, 0.0));
    for (auto& row : in.sr) {
        for (auto& v : row) {
            v = rng.below(3) == 0 ? 0.0 : static_cast<double>(rng.below(21));
        }
    }
    in.q.resize(n);
    for (auto& v : in.q) {
        v = rng.below(3) == 0 ? 0.0 : static_cast<double>(rng.below(21));
    }
    const double gammas[] = {0.0, 0.02, 0.2, 0.4, 0.5, 1.0};
    in.gamma = gammas[rng.below(6)];
    return in;
}

constexpr Scheme kSchemes[] = {Scheme::standard, Scheme::weighted, Scheme::prob,
                               Scheme::weighted_prob};

}  // namespace

TEST(Scheme, ParseRoundTrip)
{
    for (auto s : kSchemes) {
        EXPECT_EQ(parse_scheme(to_string(s)), s);
    }
    EXPECT_THROW(parse_scheme("bogus"), ValidationError);
}

TEST(BuildCounts, EchoesSingleRecords)
{
    const std::vector<LabeledRecord> records = {rec(0, {1, 0, 3}), rec(1, {0, 5, 2})};
    const auto c = build_counts(records);
    EXPECT_EQ(c, grid({{1, 0}, {0, 5}, {3, 2}}));
}

TEST(BuildCounts, SumsRepeatedLabels)
{
    const std::vector<LabeledRecord> records = {rec(0, {1, 2}), rec(0, {3, 0})};
    const auto c = build_counts(records);
    EXPECT_DOUBLE_EQ(c(0, 0), 4.0);
    EXPECT_DOUBLE_EQ(c(1, 0), 2.0);
}

TEST(BuildCounts, AllZeroGivesNoAssignments)
{
    const std::vector<LabeledRecord> records = {rec(0, {0, 0}), rec(1, {0, 0})};
    const auto c = build_counts(records);
    EXPECT_EQ(c, SpikeCountMatrix(2, 2, 0.0));
    EXPECT_EQ(assign_standard(c).n_assigned(), 0u);
}

TEST(BuildCounts, Errors)
{
    std::vector<LabeledRecord> mismatched = {rec(0, {1, 2}), rec(1, {1, 2, 3})};
    EXPECT_THROW(build_counts(mismatched), ValidationError);
    std::vector<LabeledRecord> gap = {rec(0, {1}), rec(2, {1})};
    EXPECT_THROW(build_counts(gap), ValidationError);
    EXPECT_THROW(build_counts({}), ValidationError);
}

TEST(AssignStandard, ArgmaxTiesAndSilentRows)
{
    const auto t = assign_standard(grid({{10, 2}, {3, 7}, {5, 5}, {0, 0}}));
    EXPECT_EQ(t.label[0], 0u);
    EXPECT_EQ(t.label[1], 1u);
    EXPECT_EQ(t.label[2], 0u);
    EXPECT_FALSE(t.label[3].has_value());
    EXPECT_EQ(t.members[0], (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(t.members[1], (std::vector<std::size_t>{1}));
    EXPECT_EQ(t.omega, (std::vector<std::size_t>{2, 2, 2, 0}));
    EXPECT_DOUBLE_EQ(t.frac(0, 0), 10.0 / 12.0);
    EXPECT_EQ(t.n_assigned(), 3u);
}

TEST(ScoreStandard, SumsOverMembers)
{
    // Neurons 0 and 1 assigned to label 0, neuron 2 to label 1, label 2 empty.
    const auto t = assign_standard(grid({{4, 0, 0}, {2, 1, 0}, {0, 3, 0}}));
    const std::vector<double> q = {3, 4, 9};
    EXPECT_EQ(score_standard(q, t), (std::vector<double>{7, 9, 0}));
    const std::vector<double> zero = {0, 0, 0};
    EXPECT_EQ(score_standard(zero, t), (std::vector<double>{0, 0, 0}));
}

TEST(WeightInvolvement, Examples)
{
    // gamma * R = 2 with R = 4, gamma = 0.5.
    const auto t = assign_standard(grid({{1, 1, 1, 0}, {1, 1, 0, 0}, {0, 0, 0, 0}}));
    const std::vector<double> q = {6, 5, 7};
    const auto out = weight_involvement(q, t, 0.5, 4);
    EXPECT_DOUBLE_EQ(out[0], 2.0);
    EXPECT_DOUBLE_EQ(out[1], 5.0);
    EXPECT_DOUBLE_EQ(out[2], 0.0);
}

TEST(WeightResponseStrength, SplitsByTrainingFraction)
{
    const auto t = assign_standard(grid({{8, 2}, {0, 5}}));
    const std::vector<double> reg = {4, 3};
    const auto split = weight_response_strength(reg, t);
    EXPECT_DOUBLE_EQ(split(0, 0), 3.2);
    EXPECT_DOUBLE_EQ(split(0, 1), 0.8);
    EXPECT_DOUBLE_EQ(split(1, 0), 0.0);
    EXPECT_DOUBLE_EQ(split(1, 1), 3.0);
}

TEST(SilentLearners, Factors)
{
    // Label 0 learned by neurons 0 (6) and 1 (4); label 1 by neuron 2 only.
    const auto counts = grid({{6, 0}, {4, 0}, {0, 9}});
    EXPECT_EQ(silent_learner_factors(std::vector<double>{2, 0, 0}, counts),
              (std::vector<double>{0.6, 0.0}));
    EXPECT_EQ(silent_learner_factors(std::vector<double>{1, 1, 1}, counts),
              (std::vector<double>{1.0, 1.0}));
    // A label nobody learned has factor 0.
    EXPECT_EQ(silent_learner_factors(std::vector<double>{1, 1}, grid({{1, 0}, {1, 0}})),
              (std::vector<double>{1.0, 0.0}));
    const Matrix<double> split = grid({{2, 0}, {1, 0}, {0, 5}});
    const auto pen = penalize_silent(split, std::vector<double>{2, 0, 0}, counts);
    EXPECT_DOUBLE_EQ(pen(0, 0), 1.2);
    EXPECT_DOUBLE_EQ(pen(1, 0), 0.6);
    EXPECT_DOUBLE_EQ(pen(2, 1), 0.0);
}

TEST(ProbabilityNormalize, Examples)
{
    const auto p = probability_normalize(std::vector<double>{0, 2, 8});
    EXPECT_DOUBLE_EQ(p[0], 0.0);
    EXPECT_DOUBLE_EQ(p[1], 0.025);
    EXPECT_DOUBLE_EQ(p[2], 0.1);
    EXPECT_EQ(probability_normalize(std::vector<double>{3, 3, 3}), (std::vector<double>{0, 0, 0}));
    EXPECT_EQ(probability_normalize(std::vector<double>{0, 0}), (std::vector<double>{0, 0}));
}

TEST(Score, WeightedMatchesStandardForSingleLabelLearners)
{
    const auto counts = grid({{5, 0, 0}, {0, 3, 0}, {0, 0, 7}, {2, 0, 0}});
    const auto t = assign_standard(counts);
    const std::vector<double> q = {4, 9, 1, 2};
    const auto s = score(q, t, counts, Scheme::standard, 0.02);
    const auto w = score(q, t, counts, Scheme::weighted, 0.02);
    EXPECT_EQ(s, w);
    EXPECT_EQ(argmax(s), 1u);
}

TEST(Score, ZeroQueryGivesZeroScores)
{
    const auto counts = grid({{5, 1}, {2, 3}});
    const auto t = assign_standard(counts);
    for (auto scheme : kSchemes) {
        EXPECT_EQ(score(std::vector<double>{0, 0}, t, counts, scheme, 0.02),
                  (std::vector<double>{0, 0}));
    }
}

TEST(Score, SixNeuronThreeLabelExample)
{
    const oracle::Grid sr = {{4, 1, 0}, {0, 6, 2}, {3, 3, 3}, {0, 0, 0}, {1, 0, 5}, {0, 7, 0}};
    const std::vector<double> q = {5, 0, 2, 8, 3, 1};
    const auto counts = grid(sr);
    const auto t = assign_standard(counts);
    for (auto scheme : kSchemes) {
        const auto got = score(q, t, counts, scheme, 0.5);
        const auto want = oracle::decode(sr, q, std::string(to_string(scheme)), 0.5);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t l = 0; l < got.size(); ++l) {
            EXPECT_NEAR(got[l], want[l], 1e-12) << to_string(scheme) << " label " << l;
        }
    }
}

TEST(Score, MatchesOracleOnRandomInstances)
{
    Rng rng(2024);
    for (int c = 0; c < 1000; ++c) {
        const auto in = random_instance(rng);
        const auto counts = grid(in.sr);
        const auto t = assign_standard(counts);
        for (auto scheme : kSchemes) {
            const auto got = score(in.q, t, counts, scheme, in.gamma);
            const auto want = oracle::decode(in.sr, in.q, std::string(to_string(scheme)), in.gamma);
            ASSERT_EQ(got.size(), want.size());
            for (std::size_t l = 0; l < got.size(); ++l) {
                ASSERT_NEAR(got[l], want[l], 1e-12)
                    << "case " << c << " " << to_string(scheme) << " label " << l;
            }
        }
    }
}

TEST(Score, ScoreAllMatchesRowByRow)
{
    Rng rng(5);
    const auto in = random_instance(rng);
    const auto counts = grid(in.sr);
    const auto t = assign_standard(counts);
    Matrix<double> queries(4, in.q.size());
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t i = 0; i < in.q.size(); ++i) {
            queries(r, i) = static_cast<double>(rng.below(10));
        }
    }
    const auto all = score_all(queries, t, counts, Scheme::weighted_prob, 0.2);
    EXPECT_EQ(all.scheme, Scheme::weighted_prob);
    for (std::size_t r = 0; r < 4; ++r) {
        const auto one = score(queries.row(r), t, counts, Scheme::weighted_prob, 0.2);
        for (std::size_t l = 0; l < one.size(); ++l) {
            EXPECT_EQ(all.scores(r, l), one[l]);
        }
    }
}

TEST(Argmax, TiesGoLow)
{
    EXPECT_EQ(argmax(std::vector<double>{1, 3, 3, 2}), 1u);
    EXPECT_EQ(argmax(std::vector<double>{0, 0}), 0u);
    EXPECT_EQ(argmax(std::vector<double>{}), 0u);
}

TEST(AssignmentProperties, MembershipMatchesLabels)
{
    Rng rng(31);
    for (int c = 0; c < 1000; ++c) {
        const auto in = random_instance(rng);
        const auto t = assign_standard(grid(in.sr));
        for (std::size_t i = 0; i < t.n_neurons(); ++i) {
            std::size_t nonzero = 0;
            double total = 0.0, frac_sum = 0.0;
            for (std::size_t l = 0; l < t.n_labels(); ++l) {
                nonzero += in.sr[i][l] > 0;
                total += in.sr[i][l];
                frac_sum += t.frac(i, l);
                const auto& m = t.members[l];
                const bool member = std::find(m.begin(), m.end(), i) != m.end();
                ASSERT_EQ(member, t.label[i] == l);
            }
            ASSERT_EQ(t.omega[i], nonzero);
            if (total > 0) {
                ASSERT_NEAR(frac_sum, 1.0, 1e-12);
            } else {
                ASSERT_FALSE(t.label[i].has_value());
            }
        }
    }
}

TEST(AssignmentProperties, InvolvementIdentityBelowThreshold)
{
    Rng rng(32);
    for (int c = 0; c < 1000; ++c) {
        const auto in = random_instance(rng);
        const auto t = assign_standard(grid(in.sr));
        const std::size_t r = t.n_labels();
        const auto max_omega = *std::max_element(t.omega.begin(), t.omega.end());
        const double gamma = static_cast<double>(std::max<std::size_t>(max_omega, 1)) / r;
        const auto out = weight_involvement(in.q, t, gamma, r);
        for (std::size_t i = 0; i < out.size(); ++i) {
            ASSERT_EQ(out[i], t.omega[i] == 0 ? 0.0 : in.q[i]);
        }
    }
}

TEST(AssignmentProperties, SplitConservesCounts)
{
    Rng rng(33);
    for (int c = 0; c < 1000; ++c) {
        const auto in = random_instance(rng);
        const auto t = assign_standard(grid(in.sr));
        const auto reg = weight_involvement(in.q, t, in.gamma, t.n_labels());
        const auto split = weight_response_strength(reg, t);
        for (std::size_t i = 0; i < t.n_neurons(); ++i) {
            if (t.omega[i] == 0) {
                continue;
            }
            double sum = 0.0;
            for (std::size_t l = 0; l < t.n_labels(); ++l) {
                sum += split(i, l);
            }
            ASSERT_NEAR(sum, reg[i], 1e-12);
        }
    }
}

TEST(AssignmentProperties, SilentFactorRange)
{
    Rng rng(34);
    for (int c = 0; c < 1000; ++c) {
        const auto in = random_instance(rng);
        const auto counts = grid(in.sr);
        const auto f = silent_learner_factors(in.q, counts);
        for (std::size_t l = 0; l < f.size(); ++l) {
            ASSERT_GE(f[l], 0.0);
            ASSERT_LE(f[l], 1.0);
            bool learned = false, all_fired = true;
            for (std::size_t i = 0; i < in.q.size(); ++i) {
                if (in.sr[i][l] > 0) {
                    learned = true;
                    all_fired = all_fired && in.q[i] > 0;
                }
            }
            ASSERT_EQ(f[l] == 1.0, learned && all_fired) << "case " << c;
        }
    }
}

TEST(AssignmentProperties, ProbabilityNormalizeRangeAndArgmax)
{
    Rng rng(35);
    for (int c = 0; c < 1000; ++c) {
        std::vector<double> v(1 + rng.below(12));
        for (auto& x : v) {
            x = static_cast<double>(rng.below(30));
        }
        const auto p = probability_normalize(v);
        double sum = 0.0;
        for (double x : v) {
            sum += x;
        }
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        for (double x : p) {
            ASSERT_GE(x, 0.0);
            if (sum > 0) {
                ASSERT_LE(x, 1.0 / sum + 1e-15);
            }
        }
        if (*hi > *lo) {
            ASSERT_EQ(argmax(p), argmax(v));
        }
    }
}
