// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "flakelens/metrics/report.hpp"

namespace fs = std::filesystem;
using namespace flakelens;
using namespace flakelens::metrics;

namespace {

Region region(int cls, double conf, double x0, double y0, double x1, double y1) {
    Region r;
    r.class_id = cls;
    r.confidence = conf;
    r.box = core::PixelBox::make(x0, y0, x1, y1);
    return r;
}

// ------------------------------------------------------------ independent oracle
// Integer boxes, rational IoU compared by cross-multiplication, AP summed over
// recall levels k/n instead of over ranked points.

struct IBox {
    long x0, y0, x1, y1;
};

IBox ibox(const Region& r) {
    return {std::lround(r.box.x0), std::lround(r.box.y0), std::lround(r.box.x1), std::lround(r.box.y1)};
}

// IoU as numerator / denominator.
std::pair<long, long> iou_frac(IBox a, IBox b) {
    const long iw = std::max(0L, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
    const long ih = std::max(0L, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
    const long inter = iw * ih;
    const long uni = (a.x1 - a.x0) * (a.y1 - a.y0) + (b.x1 - b.x0) * (b.y1 - b.y0) - inter;
    return {inter, uni};
}

std::optional<double> oracle_ap(const std::vector<EvalImage>& corpus, int cls, int thresh_percent) {
    std::vector<std::pair<double, bool>> ranked;
    long n_gt = 0;
    for (const auto& img : corpus) {
        std::vector<const Region*> dets, gts;
        for (const auto& d : img.dets)
            if (d.class_id == cls) dets.push_back(&d);
        for (const auto& g : img.gts)
            if (g.class_id == cls) gts.push_back(&g);
        n_gt += static_cast<long>(gts.size());
        std::stable_sort(dets.begin(), dets.end(), [](auto a, auto b) { return a->confidence > b->confidence; });
        std::vector<bool> used(gts.size());
        for (const Region* d : dets) {
            int best = -1;
            std::pair<long, long> best_iou{0, 1};
            for (std::size_t k = 0; k < gts.size(); ++k) {
                if (used[k]) continue;
                const auto f = iou_frac(ibox(*d), ibox(*gts[k]));
                const bool passes = f.first * 100 >= f.second * thresh_percent && f.first > 0;
                if (passes && f.first * best_iou.second > best_iou.first * f.second) {
                    best = static_cast<int>(k);
                    best_iou = f;
                }
            }
            if (best >= 0) used[best] = true;
            ranked.emplace_back(d->confidence, best >= 0);
        }
    }
    if (n_gt == 0) return std::nullopt;
    std::stable_sort(ranked.begin(), ranked.end(), [](auto& a, auto& b) { return a.first > b.first; });
    double ap = 0.0;
    for (long k = 1; k <= n_gt; ++k) {
        double best = 0.0;
        long tp = 0;
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            tp += ranked[i].second;
            if (tp >= k) best = std::max(best, static_cast<double>(tp) / static_cast<double>(i + 1));
        }
        ap += best / static_cast<double>(n_gt);
    }
    return ap;
}

std::vector<EvalImage> random_corpus(std::mt19937_64& rng, int images, int classes) {
    std::uniform_int_distribution<int> coord(0, 16), size(2, 10), cls(0, classes - 1), nd(0, 5), ng(0, 3);
    std::uniform_real_distribution<double> conf(0.0, 1.0);
    std::vector<EvalImage> corpus(static_cast<std::size_t>(images));
    for (auto& img : corpus) {
        img.width = img.height = 32;
        const int g = ng(rng), d = nd(rng);
        for (int k = 0; k < g; ++k) {
            const int x = coord(rng), y = coord(rng);
            img.gts.push_back(region(cls(rng), 1.0, x, y, x + size(rng), y + size(rng)));
        }
        for (int k = 0; k < d; ++k) {
            if (!img.gts.empty() && k % 2 == 0) {
                // Jitter a GT so that matches at various IoUs are common.
                const auto& t = img.gts[static_cast<std::size_t>(k / 2) % img.gts.size()];
                std::uniform_int_distribution<int> j(-2, 2);
                const double x0 = t.box.x0 + j(rng), y0 = t.box.y0 + j(rng);
                img.dets.push_back(region(rng() % 4 ? t.class_id : cls(rng), conf(rng), x0, y0,
                                          std::max(x0 + 1, t.box.x1 + j(rng)), std::max(y0 + 1, t.box.y1 + j(rng))));
            } else {
                const int x = coord(rng), y = coord(rng);
                img.dets.push_back(region(cls(rng), conf(rng), x, y, x + size(rng), y + size(rng)));
            }
        }
    }
    return corpus;
}

// ------------------------------------------------------------ matching

TEST(Match, ExactDetectionPairsWithIouOne) {
    const std::vector<Region> d{region(0, 0.9, 0, 0, 10, 10)}, g{region(0, 1, 0, 0, 10, 10)};
    const auto m = match_detections(d, g, 0.5, Geometry::box);
    ASSERT_EQ(m.pairs.size(), 1u);
    EXPECT_DOUBLE_EQ(m.pairs[0].iou, 1.0);
}

TEST(Match, BelowThresholdIsUnmatchedOnBothSides) {
    const std::vector<Region> d{region(0, 0.9, 0, 0, 4, 10)}, g{region(0, 1, 0, 0, 10, 10)};
    const auto m = match_detections(d, g, 0.5, Geometry::box);
    EXPECT_TRUE(m.pairs.empty());
    EXPECT_EQ(m.unmatched_dets, std::vector<int>{0});
    EXPECT_EQ(m.unmatched_gts, std::vector<int>{0});
}

TEST(Match, HigherConfidenceWinsRegardlessOfInputOrder) {
    const std::vector<Region> d{region(0, 0.8, 0, 0, 10, 10), region(0, 0.9, 0, 0, 10, 9)};
    const std::vector<Region> g{region(0, 1, 0, 0, 10, 10)};
    const auto m = match_detections(d, g, 0.5, Geometry::box);
    ASSERT_EQ(m.pairs.size(), 1u);
    EXPECT_EQ(m.pairs[0].det, 1);
    EXPECT_EQ(m.unmatched_dets, std::vector<int>{0});
}

TEST(Match, ClassAwareVersusBlind) {
    const std::vector<Region> d{region(1, 0.9, 0, 0, 10, 10)}, g{region(0, 1, 0, 0, 10, 10)};
    EXPECT_TRUE(match_detections(d, g, 0.5, Geometry::box, true).pairs.empty());
    EXPECT_EQ(match_detections(d, g, 0.5, Geometry::box, false).pairs.size(), 1u);
}

TEST(Match, MaskGeometry) {
    Region a = region(0, 0.9, 0, 0, 10, 10), b = region(0, 1, 0, 0, 10, 10);
    EXPECT_THROW(region_iou(a, b, Geometry::mask), std::invalid_argument);
    a.mask = core::rasterize_box(core::PixelBox::make(0, 0, 10, 2), 10, 10);
    b.mask = core::rasterize_box(core::PixelBox::make(0, 1, 10, 3), 10, 10);
    EXPECT_NEAR(region_iou(a, b, Geometry::mask), 1.0 / 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(region_iou(a, b, Geometry::box), 1.0);
}

TEST(Match, PropertiesOnRandomInputs) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto c = random_corpus(rng, 1, 2);
        const auto m = match_detections(c[0].dets, c[0].gts, 0.5, Geometry::box);
        std::vector<int> dseen(c[0].dets.size()), gseen(c[0].gts.size());
        for (const auto& p : m.pairs) {
            EXPECT_GE(p.iou, 0.5);
            EXPECT_EQ(++dseen[p.det], 1);
            EXPECT_EQ(++gseen[p.gt], 1);
        }
        EXPECT_EQ(m.pairs.size() + m.unmatched_dets.size(), c[0].dets.size());
        EXPECT_EQ(m.pairs.size() + m.unmatched_gts.size(), c[0].gts.size());
    }
}

// ------------------------------------------------------------ AP

TEST(AveragePrecision, Examples) {
    const std::vector<Region> gt{region(0, 1, 0, 0, 10, 10)};
    const std::vector<Region> hit{region(0, 0.9, 0, 0, 10, 10)};
    EXPECT_DOUBLE_EQ(*average_precision(hit, gt, 0, 0.5), 1.0);
    EXPECT_DOUBLE_EQ(*average_precision({}, gt, 0, 0.5), 0.0);
    const std::vector<Region> fp_then_tp{region(0, 0.9, 50, 50, 60, 60), region(0, 0.8, 0, 0, 10, 10)};
    EXPECT_DOUBLE_EQ(*average_precision(fp_then_tp, gt, 0, 0.5), 0.5);
    EXPECT_FALSE(average_precision(hit, {}, 0, 0.5).has_value());
}

TEST(AveragePrecision, PrSamplesFollowEnvelope) {
    const std::vector<RankedHit> hits{{0.9, false}, {0.8, true}};
    const auto s = pr_samples(hits, 1);
    ASSERT_EQ(s.size(), 101u);
    for (double p : s) EXPECT_DOUBLE_EQ(p, 0.5);
    const auto half = pr_samples({{0.9, true}}, 2);
    EXPECT_DOUBLE_EQ(half[50], 1.0);
    EXPECT_DOUBLE_EQ(half[51], 0.0);
}

TEST(AveragePrecision, IouRangePresets) {
    const auto r = iou_range(90);
    ASSERT_EQ(r.size(), 9u);
    EXPECT_EQ(r.front(), 0.5);
    EXPECT_EQ(r.back(), 0.9);
    EXPECT_EQ(iou_range(95).size(), 10u);
    EXPECT_THROW(iou_range(92), std::invalid_argument);
}

TEST(AveragePrecision, MatchesOracleOnRandomCorpora) {
    std::mt19937_64 rng(5);
    const auto thresholds = iou_range(95);
    for (int trial = 0; trial < 300; ++trial) {
        const auto corpus = random_corpus(rng, 1 + trial % 6, 3);
        for (int c = 0; c < 3; ++c) {
            const std::size_t n = class_gt_count(corpus, c);
            for (std::size_t k = 0; k < thresholds.size(); ++k) {
                const auto got = ap_from_hits(class_hits(corpus, c, thresholds[k], Geometry::box), n);
                const auto want = oracle_ap(corpus, c, 50 + 5 * static_cast<int>(k));
                ASSERT_EQ(got.has_value(), want.has_value());
                if (got) {
                    EXPECT_NEAR(*got, *want, 1e-9) << "trial " << trial << " class " << c;
                }
            }
        }
    }
}

TEST(AveragePrecision, DependsOnlyOnRanking) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        auto corpus = random_corpus(rng, 4, 2);
        if (class_gt_count(corpus, 0) == 0) continue;
        const auto base = ap_from_hits(class_hits(corpus, 0, 0.5, Geometry::box), class_gt_count(corpus, 0));
        for (auto& img : corpus)
            for (auto& d : img.dets) d.confidence = 0.01 + 0.5 * d.confidence * d.confidence;
        EXPECT_DOUBLE_EQ(*ap_from_hits(class_hits(corpus, 0, 0.5, Geometry::box), class_gt_count(corpus, 0)), *base);
    }
}

TEST(AveragePrecision, RemovingFalsePositiveOrPromotingTruePositiveNeverHurts) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<RankedHit> hits;
        const int n = 1 + static_cast<int>(rng() % 8);
        for (int i = 0; i < n; ++i) hits.push_back({u(rng), u(rng) < 0.5});
        const std::size_t gt = 8;
        const double base = *ap_from_hits(hits, gt);
        const auto fp = std::find_if(hits.begin(), hits.end(), [](auto& h) { return !h.tp; });
        if (fp != hits.end()) {
            auto fewer = hits;
            fewer.erase(fewer.begin() + (fp - hits.begin()));
            EXPECT_GE(*ap_from_hits(fewer, gt) + 1e-12, base);
        }
        const auto tp = std::find_if(hits.begin(), hits.end(), [](auto& h) { return h.tp; });
        if (tp != hits.end()) {
            auto promoted = hits;
            promoted[tp - hits.begin()].confidence = 2.0;
            EXPECT_GE(*ap_from_hits(promoted, gt) + 1e-12, base);
        }
    }
}

// ------------------------------------------------------------ mAP

TEST(Map, PerfectDetectorScoresOne) {
    std::mt19937_64 rng(8);
    auto corpus = random_corpus(rng, 10, 3);
    for (auto& img : corpus) {
        img.dets = img.gts;
        for (std::size_t k = 0; k < img.dets.size(); ++k) img.dets[k].confidence = 0.5 + 0.01 * k;
    }
    const auto r = iou_range(90);
    EXPECT_DOUBLE_EQ(map_at(corpus, 3, std::vector<double>{0.5}), 1.0);
    EXPECT_DOUBLE_EQ(map_at(corpus, 3, r), 1.0);
}

TEST(Map, UniformIou07GivesFiveNinths) {
    std::vector<EvalImage> corpus(3);
    for (int i = 0; i < 3; ++i) {
        corpus[i].gts.push_back(region(i % 2, 1, 10, 10, 20, 20));
        corpus[i].dets.push_back(region(i % 2, 0.5 + 0.1 * i, 10, 10, 17, 20));  // 70 / 100
    }
    const auto r = iou_range(90);
    EXPECT_DOUBLE_EQ(map_at(corpus, 2, r), 5.0 / 9.0);
    EXPECT_DOUBLE_EQ(map_at(corpus, 2, std::vector<double>{0.7}), 1.0);
    EXPECT_DOUBLE_EQ(map_at(corpus, 2, std::vector<double>{0.75}), 0.0);
}

TEST(Map, ClassWithoutGroundTruthIsExcluded) {
    std::vector<EvalImage> corpus(1);
    corpus[0].gts.push_back(region(0, 1, 0, 0, 10, 10));
    corpus[0].dets.push_back(region(0, 0.9, 0, 0, 10, 10));
    corpus[0].dets.push_back(region(1, 0.9, 30, 30, 40, 40));
    const auto table = ap_table(corpus, 2, std::vector<double>{0.5}, Geometry::box);
    EXPECT_FALSE(table.per_class[1].has_value());
    EXPECT_DOUBLE_EQ(table.mean(), 1.0);
}

TEST(Map, SingleThresholdEqualsMap50AndErrors) {
    std::mt19937_64 rng(9);
    const auto corpus = random_corpus(rng, 12, 3);
    const auto r = iou_range(90);
    const auto table = ap_table(corpus, 3, r, Geometry::box);
    double first = 0.0;
    int n = 0;
    for (const auto& row : table.per_class) {
        if (row) {
            first += row->front();
            ++n;
        }
    }
    EXPECT_EQ(map_at(corpus, 3, std::vector<double>{0.5}), first / n);
    std::vector<EvalImage> empty(2);
    EXPECT_THROW(map_at(empty, 3, r), std::invalid_argument);
    EXPECT_THROW(map_at(corpus, 3, std::vector<double>{}), std::invalid_argument);
    EXPECT_THROW(map_at(corpus, 3, std::vector<double>{1.0}), std::invalid_argument);
}

// ------------------------------------------------------------ confusion

TEST(Confusion, Examples) {
    std::vector<EvalImage> corpus(1);
    corpus[0].gts = {region(0, 1, 0, 0, 10, 10), region(1, 1, 20, 20, 30, 30)};
    corpus[0].dets = {region(0, 0.9, 0, 0, 10, 10), region(1, 0.9, 20, 20, 30, 30)};
    auto m = confusion_matrix(corpus, 2);
    EXPECT_EQ(m.at(0, 0), 1);
    EXPECT_EQ(m.at(1, 1), 1);
    EXPECT_DOUBLE_EQ(*m.accuracy(0), 1.0);

    corpus[0].dets = {region(1, 0.9, 0, 0, 10, 9)};
    m = confusion_matrix(corpus, 2);
    EXPECT_EQ(m.at(0, 1), 1);
    EXPECT_EQ(m.at(1, m.background()), 1);

    corpus[0].dets.clear();
    m = confusion_matrix(corpus, 2);
    EXPECT_EQ(m.at(0, 2), 1);
    EXPECT_EQ(m.at(1, 2), 1);
    EXPECT_DOUBLE_EQ(*m.accuracy(0), 0.0);
}

TEST(Confusion, ConservationOnRandomCorpora) {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 100; ++trial) {
        const auto corpus = random_corpus(rng, 5, 3);
        const auto m = confusion_matrix(corpus, 3, 0.5, 0.25);
        long gts = 0, unmatched = 0;
        std::vector<long> per_class(3);
        for (const auto& img : corpus) {
            gts += static_cast<long>(img.gts.size());
            for (const auto& g : img.gts) ++per_class[g.class_id];
            std::vector<Region> kept;
            for (const auto& d : img.dets)
                if (d.confidence >= 0.25) kept.push_back(d);
            unmatched += static_cast<long>(match_detections(kept, img.gts, 0.5, Geometry::box, false).unmatched_dets.size());
        }
        EXPECT_EQ(m.total(), gts + unmatched);
        for (int c = 0; c < 3; ++c) EXPECT_EQ(m.row_sum(c), per_class[c]);
    }
}

// ------------------------------------------------------------ fixture corpus and report

class EvalCorpus : public ::testing::Test {
protected:
    void SetUp() override {
        root_ = fs::path(FLAKELENS_FIXTURES) / "eval_corpus";
        std::ifstream in(root_ / "expected.json");
        expected_ = nlohmann::json::parse(in);
    }
    fs::path root_;
    nlohmann::json expected_;
    core::ClassSet classes_{{"thin", "thick", "bulk"}};
};

TEST_F(EvalCorpus, HandComputedValues) {
    const auto corpus = load_corpus(root_ / "pred", root_ / "gt", classes_);
    ASSERT_EQ(corpus.size(), 20u);
    const EvalReport r = evaluate(corpus, classes_);
    for (int c = 0; c < 3; ++c) {
        const auto& want = expected_["ap"][classes_.name(c)];
        ASSERT_TRUE(r.classes[c].ap.has_value());
        for (std::size_t k = 0; k < 9; ++k) {
            EXPECT_NEAR((*r.classes[c].ap)[k], want[k].get<double>(), 1e-9) << classes_.name(c) << " @" << k;
            EXPECT_NEAR((*r.classes[c].ap)[k], *oracle_ap(corpus, c, 50 + 5 * static_cast<int>(k)), 1e-9);
        }
    }
    EXPECT_NEAR(r.map50, expected_["mAP50"].get<double>(), 1e-9);
    EXPECT_NEAR(r.map_range, expected_["mAP50-90"].get<double>(), 1e-9);
    for (int g = 0; g < 4; ++g)
        for (int p = 0; p < 4; ++p) EXPECT_EQ(r.confusion.at(g, p), expected_["confusion_matrix"][g][p].get<long>());
    EXPECT_EQ(r.confusion.total(), 26);
    EXPECT_NEAR(*r.confusion.accuracy(0), 11.0 / 15.0, 1e-12);
}

TEST_F(EvalCorpus, MaskGeometryAgreesForBoxShapedRegions) {
    const auto corpus = load_corpus(root_ / "pred", root_ / "gt", classes_);
    EvalConfig cfg;
    cfg.geometry = Geometry::mask;
    const EvalReport r = evaluate(corpus, classes_, cfg);
    EXPECT_NEAR(r.map50, expected_["mAP50"].get<double>(), 1e-9);
}

TEST_F(EvalCorpus, ReportTextAndJson) {
    const auto corpus = load_corpus(root_ / "pred", root_ / "gt", classes_);
    const EvalReport r = evaluate(corpus, classes_);
    const std::string text = format_report(r);
    EXPECT_NE(text.find("mAP50: 0.547436"), std::string::npos) << text;
    EXPECT_NE(text.find("mAP50-90: 0.463754"), std::string::npos);
    EXPECT_NE(text.find("background"), std::string::npos);
    const auto j = to_json(r);
    EXPECT_EQ(j["classes"].size(), 3u);
    EXPECT_EQ(j["confusion_matrix"][0][0], 11);
    EXPECT_DOUBLE_EQ(j["mAP50"].get<double>(), 0.547436);

    const fs::path out = fs::temp_directory_path() / "flakelens_report.eval";
    write_report(r, out);
    std::ifstream in(out);
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first, "report.eval");
    EXPECT_THROW(write_report(r, "/nonexistent/dir/report.eval"), std::runtime_error);
}

TEST_F(EvalCorpus, UndefinedClassIsReported) {
    auto corpus = load_corpus(root_ / "pred", root_ / "gt", classes_);
    for (auto& img : corpus)
        std::erase_if(img.gts, [](const Region& r) { return r.class_id == 2; });
    const EvalReport r = evaluate(corpus, classes_);
    EXPECT_FALSE(r.classes[2].ap.has_value());
    EXPECT_NE(format_report(r).find("AP: undefined"), std::string::npos);
}

}  // namespace
