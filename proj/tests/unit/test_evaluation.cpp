#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "oracles.hpp"
#include "vprsnn/error.hpp"
#include "vprsnn/evaluation.hpp"
#include "vprsnn/random.hpp"

using namespace vprsnn;

namespace {

std::vector<Prediction> preds(const std::vector<std::size_t>& labels,
                              const std::vector<double>& conf)
{
    std::vector<Prediction> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out.push_back({labels[i], conf[i]});
    }
    return out;
}

Matrix<double> mat(const std::vector<std::vector<double>>& g)
{
    Matrix<double> m(g.size(), g.front().size());
    for (std::size_t r = 0; r < g.size(); ++r) {
        for (std::size_t c = 0; c < g[r].size(); ++c) {
            m(r, c) = g[r][c];
        }
    }
    return m;
}

}  // namespace

TEST(ToDistance, SubtractsFromGlobalMax)
{
    const auto d = to_distance(mat({{7, 10}, {2, 4}}));
    EXPECT_EQ(d, mat({{3, 0}, {8, 6}}));
}

TEST(ToDistance, ReversesRanking)
{
    Rng rng(3);
    Matrix<double> s(5, 6);
    for (auto& v : s.data()) {
        v = rng.uniform() * 10;
    }
    const auto d = to_distance(s);
    for (std::size_t r = 0; r < 5; ++r) {
        for (std::size_t a = 0; a < 6; ++a) {
            EXPECT_GE(d(r, a), 0.0);
            for (std::size_t b = 0; b < 6; ++b) {
                EXPECT_EQ(s(r, a) > s(r, b), d(r, a) < d(r, b));
            }
        }
    }
}

TEST(ScoreShares, RowsSumToOneOrStayZero)
{
    const auto sh = score_shares(mat({{1, 3}, {0, 0}, {2, 2}}));
    EXPECT_EQ(sh, mat({{0.25, 0.75}, {0, 0}, {0.5, 0.5}}));
}

TEST(Predictions, FromScoresUsesArgmaxAndShare)
{
    const auto p = predictions_from_scores(mat({{1, 3, 0}, {2, 2, 0}, {0, 0, 0}}));
    EXPECT_EQ(p[0].label, 1u);
    EXPECT_DOUBLE_EQ(p[0].confidence, 0.75);
    EXPECT_EQ(p[1].label, 0u);
    EXPECT_DOUBLE_EQ(p[1].confidence, 0.5);
    EXPECT_EQ(p[2].label, 0u);
    EXPECT_DOUBLE_EQ(p[2].confidence, 0.0);
}

TEST(Predictions, FromDistancesUsesArgmin)
{
    const auto p = predictions_from_distances(mat({{3, 1, 2}, {0, 5, 0}}));
    EXPECT_EQ(p[0].label, 1u);
    EXPECT_DOUBLE_EQ(p[0].confidence, 4.0);
    EXPECT_EQ(p[1].label, 0u);
    EXPECT_DOUBLE_EQ(p[1].confidence, 5.0);
}

TEST(PrCurve, AllCorrect)
{
    const std::vector<std::size_t> truth = {0, 1, 2};
    const auto c = pr_curve(preds({0, 1, 2}, {3, 2, 1}), truth);
    EXPECT_DOUBLE_EQ(c.r_at_100p, 1.0);
    EXPECT_DOUBLE_EQ(c.auc, 1.0);
    EXPECT_DOUBLE_EQ(c.p_at_100r, 1.0);
}

TEST(PrCurve, AllWrong)
{
    const std::vector<std::size_t> truth = {0, 1, 2};
    const auto c = pr_curve(preds({1, 2, 0}, {3, 2, 1}), truth);
    EXPECT_DOUBLE_EQ(c.r_at_100p, 0.0);
    EXPECT_DOUBLE_EQ(c.p_at_100r, 0.0);
    EXPECT_DOUBLE_EQ(c.auc, 0.0);
}

TEST(PrCurve, FourQueryExample)
{
    const std::vector<std::size_t> truth = {0, 1, 2, 3};
    const auto c = pr_curve(preds({0, 1, 0, 3}, {4, 3, 2, 1}), truth);
    ASSERT_EQ(c.points.size(), 4u);
    const double want[4][2] = {{0.25, 1.0}, {0.5, 1.0}, {0.5, 2.0 / 3.0}, {0.75, 0.75}};
    for (int i = 0; i < 4; ++i) {
        EXPECT_DOUBLE_EQ(c.points[i].recall, want[i][0]);
        EXPECT_DOUBLE_EQ(c.points[i].precision, want[i][1]);
    }
    EXPECT_DOUBLE_EQ(c.r_at_100p, 0.5);
    EXPECT_DOUBLE_EQ(c.p_at_100r, 0.75);
    // 0.25 * 1 + 0.25 * 1 + 0 + 0.25 * (2/3 + 3/4) / 2.
    EXPECT_NEAR(c.auc, 0.5 + 0.25 * (2.0 / 3.0 + 0.75) / 2.0, 1e-15);
}

TEST(PrCurve, TiedConfidencesAcceptedTogether)
{
    const std::vector<std::size_t> truth = {0, 1, 2};
    const auto c = pr_curve(preds({0, 0, 2}, {5, 5, 1}), truth);
    ASSERT_EQ(c.points.size(), 2u);
    EXPECT_DOUBLE_EQ(c.points[0].recall, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(c.points[0].precision, 0.5);
    EXPECT_DOUBLE_EQ(c.r_at_100p, 0.0);
}

TEST(PrCurve, Errors)
{
    const std::vector<std::size_t> none;
    EXPECT_THROW(pr_curve(std::vector<Prediction>{}, none), ValidationError);
    const std::vector<std::size_t> one = {0};
    EXPECT_THROW(pr_curve(preds({0, 1}, {1, 2}), one), ValidationError);
}

TEST(PrCurve, MatchesBruteForceSweep)
{
    Rng rng(77);
    for (int c = 0; c < 1000; ++c) {
        const std::size_t n = 1 + rng.below(40);
        const std::size_t labels = 1 + rng.below(6);
        std::vector<std::size_t> truth(n), predicted(n);
        std::vector<double> conf(n);
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = rng.below(labels);
            predicted[i] = rng.below(2) == 0 ? truth[i] : rng.below(labels);
            // Coarse confidences so ties are common.
            conf[i] = static_cast<double>(rng.below(8)) * 0.125;
        }
        const auto got = pr_curve(preds(predicted, conf), truth);
        const auto want = oracle::threshold_sweep(predicted, conf, truth);
        ASSERT_EQ(got.points.size(), want.recall.size()) << "case " << c;
        for (std::size_t k = 0; k < got.points.size(); ++k) {
            ASSERT_EQ(got.points[k].recall, want.recall[k]) << "case " << c;
            ASSERT_EQ(got.points[k].precision, want.precision[k]) << "case " << c;
        }
        ASSERT_EQ(got.auc, want.auc) << "case " << c;
        ASSERT_EQ(got.r_at_100p, want.r_at_100p) << "case " << c;
        ASSERT_EQ(got.p_at_100r, want.p_at_100r) << "case " << c;
    }
}

TEST(PrCurve, InvariantProperties)
{
    Rng rng(78);
    for (int c = 0; c < 1000; ++c) {
        const std::size_t n = 1 + rng.below(30);
        std::vector<std::size_t> truth(n), predicted(n);
        std::vector<double> conf(n);
        bool all_correct = true;
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = rng.below(5);
            predicted[i] = rng.below(3) == 0 ? rng.below(5) : truth[i];
            all_correct = all_correct && predicted[i] == truth[i];
            conf[i] = rng.uniform();
        }
        const auto curve = pr_curve(preds(predicted, conf), truth);
        double prev = 0.0, best = 0.0;
        for (const auto& p : curve.points) {
            ASSERT_GE(p.recall, prev);
            ASSERT_LE(p.recall, 1.0);
            ASSERT_GE(p.precision, 0.0);
            ASSERT_LE(p.precision, 1.0);
            if (p.precision == 1.0) {
                best = std::max(best, p.recall);
            }
            prev = p.recall;
        }
        ASSERT_EQ(curve.r_at_100p, best);
        ASSERT_EQ(curve.r_at_100p == 1.0, all_correct);
        ASSERT_GE(curve.auc, 0.0);
        ASSERT_LE(curve.auc, 1.0 + 1e-12);
    }
}

TEST(Sad, Examples)
{
    Rng rng(4);
    ImageGray a(8, 8), b(8, 8);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a.data[i] = static_cast<std::uint8_t>(rng.below(255));
        b.data[i] = static_cast<std::uint8_t>(a.data[i] + 1);
    }
    EXPECT_DOUBLE_EQ(sad_distance(a, a), 0.0);
    EXPECT_DOUBLE_EQ(sad_distance(a, b), 1.0);
    EXPECT_DOUBLE_EQ(sad_distance(b, a), 1.0);
    EXPECT_THROW(sad_distance(a, ImageGray(4, 4)), ValidationError);
}

TEST(Sad, SelfMatchingIsPerfect)
{
    Rng rng(5);
    std::vector<ImageGray> refs;
    for (int r = 0; r < 10; ++r) {
        ImageGray img(16, 16);
        for (auto& p : img.data) {
            p = static_cast<std::uint8_t>(rng.below(256));
        }
        refs.push_back(img);
    }
    DistanceMatrix d(10, 10);
    for (std::size_t q = 0; q < 10; ++q) {
        for (std::size_t r = 0; r < 10; ++r) {
            d(q, r) = sad_distance(refs[q], refs[r]);
        }
    }
    std::vector<std::size_t> truth(10);
    for (std::size_t i = 0; i < 10; ++i) {
        truth[i] = i;
    }
    EXPECT_DOUBLE_EQ(top1_accuracy(predictions_from_distances(d), truth), 1.0);
}

TEST(Sequence, LengthOneIsIdentity)
{
    const auto d = mat({{1, 2, 3}, {4, 5, 6}});
    EXPECT_EQ(sequence_aggregate(d, 1), d);
}

TEST(Sequence, BorderWindowsShrink)
{
    const auto d = mat({{1, 2}, {3, 4}, {5, 6}});
    const auto s = sequence_aggregate(d, 3);
    EXPECT_DOUBLE_EQ(s(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(s(0, 1), 2.0);
    EXPECT_DOUBLE_EQ(s(1, 1), (4.0 + 1.0) / 2.0);
    EXPECT_DOUBLE_EQ(s(2, 1), (6.0 + 3.0) / 2.0);
    EXPECT_DOUBLE_EQ(s(2, 0), 5.0);
}

TEST(Sequence, PerfectDiagonalStaysBest)
{
    for (std::size_t len : {2u, 3u, 5u, 10u}) {
        DistanceMatrix d(8, 8, 1.0);
        for (std::size_t i = 0; i < 8; ++i) {
            d(i, i) = 0.0;
        }
        const auto s = sequence_aggregate(d, len);
        for (std::size_t q = 0; q < 8; ++q) {
            for (std::size_t r = 0; r < 8; ++r) {
                if (q == r) {
                    ASSERT_EQ(s(q, r), 0.0);
                } else if (len == 2) {
                    ASSERT_GE(s(q, r), 0.5);
                } else {
                    ASSERT_GT(s(q, r), 0.0);
                }
            }
        }
    }
}

TEST(Sequence, ShiftByConstant)
{
    Rng rng(6);
    DistanceMatrix d(6, 7);
    for (auto& v : d.data()) {
        v = rng.uniform();
    }
    auto shifted = d;
    for (auto& v : shifted.data()) {
        v += 2.5;
    }
    const auto a = sequence_aggregate(d, 4);
    const auto b = sequence_aggregate(shifted, 4);
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        EXPECT_NEAR(b.data()[i], a.data()[i] + 2.5, 1e-12);
    }
}

TEST(Sequence, RejectsZeroLength)
{
    EXPECT_THROW(sequence_aggregate(mat({{1}}), 0), ValidationError);
}

TEST(Export, CsvAndJson)
{
    const std::vector<std::size_t> truth = {0, 1, 2, 3};
    const auto c = pr_curve(preds({0, 1, 0, 3}, {4, 3, 2, 1}), truth);
    const auto csv = pr_curve_csv(c);
    EXPECT_EQ(csv.rfind("recall,precision\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
    const auto j = nlohmann::json::parse(pr_summary_json(c));
    EXPECT_DOUBLE_EQ(j.at("auc").get<double>(), c.auc);
    EXPECT_DOUBLE_EQ(j.at("r_at_100p").get<double>(), 0.5);
    EXPECT_DOUBLE_EQ(j.at("p_at_100r").get<double>(), 0.75);
    EXPECT_EQ(matrix_csv(mat({{1, 2}, {3, 4.5}})), "1.0,2.0\n3.0,4.5\n");
}

TEST(Export, Heatmap)
{
    const auto h = distance_heatmap(mat({{0, 1}, {2, 4}}));
    EXPECT_EQ(h.width, 2);
    EXPECT_EQ(h.height, 2);
    EXPECT_EQ(h.data, (std::vector<std::uint8_t>{0, 64, 128, 255}));
    const auto flat = distance_heatmap(mat({{3, 3}}));
    EXPECT_EQ(flat.data, (std::vector<std::uint8_t>{0, 0}));
}
