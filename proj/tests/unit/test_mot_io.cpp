#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <sstream>

#include "mcmot/errors.hpp"
#include "mcmot/mot_io.hpp"

using namespace mcmot;

namespace {

DetectionFile dets_from(const std::string& text) {
    std::istringstream in(text);
    return parse_detections(in);
}

std::vector<TrajectoryRecord> gt_from(const std::string& text) {
    std::istringstream in(text);
    return parse_ground_truth(in);
}

const std::filesystem::path kFixtures = MCMOT_FIXTURE_DIR;

}  // namespace

TEST(ParseDetections, StandardRow) {
    const auto f = dets_from("1,-1,10,20,30,40,0.9\n");
    ASSERT_EQ(f.detections.size(), 1u);
    const Detection& d = f.detections[0];
    EXPECT_EQ(d.frame, 1);
    EXPECT_EQ(d.box, (BoundingBox{10, 20, 30, 40}));
    EXPECT_DOUBLE_EQ(d.confidence, 0.9);
    EXPECT_EQ(d.class_id, kDefaultClass);
    EXPECT_FALSE(f.rescaled);
}

TEST(ParseDetections, EmptyFile) {
    const auto f = dets_from("");
    EXPECT_TRUE(f.detections.empty());
    EXPECT_EQ(f.rejected_rows, 0u);
}

TEST(ParseDetections, MinMaxRescaling) {
    const auto f = dets_from("1,-1,0,0,5,5,2.0\n1,-1,9,9,5,5,4.0\n");
    ASSERT_TRUE(f.rescaled);
    EXPECT_DOUBLE_EQ(f.detections[0].confidence, 1.0);
    EXPECT_DOUBLE_EQ(f.detections[1].confidence, 0.0);
    EXPECT_DOUBLE_EQ(f.raw_min_confidence, 2.0);
    EXPECT_DOUBLE_EQ(f.raw_max_confidence, 4.0);
}

TEST(ParseDetections, MalformedRowReportsLine) {
    try {
        dets_from("1,-1,0,0,5,5,0.5\n2,-1,abc,0,5,5,0.5\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(dets_from("1,-1,0,0,5\n"), ParseError);
}

TEST(ParseDetections, NonPositiveExtentRejectedWithCount) {
    const auto f = dets_from("1,-1,0,0,0,5,0.5\n1,-1,0,0,5,-1,0.5\n1,-1,0,0,5,5,0.5\n");
    EXPECT_EQ(f.detections.size(), 1u);
    EXPECT_EQ(f.rejected_rows, 2u);
}

TEST(ParseDetections, OrderedByFrameThenConfidenceAndRescalePreservesOrder) {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> frame(1, 20);
    std::uniform_real_distribution<double> conf(-3, 7);
    std::ostringstream text;
    std::vector<std::pair<int, double>> raw;
    for (int i = 0; i < 300; ++i) {
        const int fr = frame(rng);
        const double c = conf(rng);
        raw.emplace_back(fr, c);
        text << fr << ",-1," << i << ",0,5,5," << c << "\n";
    }
    const auto f = dets_from(text.str());
    ASSERT_EQ(f.detections.size(), raw.size());
    for (std::size_t i = 1; i < f.detections.size(); ++i) {
        const auto& a = f.detections[i - 1];
        const auto& b = f.detections[i];
        ASSERT_TRUE(a.frame < b.frame || (a.frame == b.frame && a.confidence >= b.confidence));
    }
    // The box left carries the raw row index, so rescaled order can be checked
    // against raw order pairwise.
    for (const auto& a : f.detections) {
        for (const auto& b : f.detections) {
            const double ra = raw[static_cast<std::size_t>(a.box.left)].second;
            const double rb = raw[static_cast<std::size_t>(b.box.left)].second;
            if (ra < rb) { ASSERT_LE(a.confidence, b.confidence); }
        }
        ASSERT_GE(a.confidence, 0.0);
        ASSERT_LE(a.confidence, 1.0);
    }
}

TEST(ParseDetections, ClassMapAppliesToEighthColumn) {
    const ClassMap map{{"car", 3}, {"person", 1}};
    std::istringstream in("1,-1,0,0,5,5,0.5,car\n1,-1,0,0,5,5,0.6,person\n");
    const auto f = parse_detections(in, &map);
    EXPECT_EQ(f.detections[0].class_id, 1);
    EXPECT_EQ(f.detections[1].class_id, 3);
    std::istringstream bad("1,-1,0,0,5,5,0.5,truck\n");
    EXPECT_THROW(parse_detections(bad, &map), ParseError);
}

TEST(ParseGroundTruth, ActiveAndIgnoredRows) {
    const auto gt = gt_from("5,3,0,0,10,10,1,1,1.0\n6,3,0,0,10,10,0,1,1.0\n");
    ASSERT_EQ(gt.size(), 2u);
    EXPECT_EQ(gt[0].identity, 3);
    EXPECT_FALSE(gt[0].ignore);
    EXPECT_TRUE(gt[1].ignore);
}

TEST(ParseGroundTruth, DuplicateNamesBothLines) {
    try {
        gt_from("1,7,0,0,10,10,1,1,1\n2,7,0,0,10,10,1,1,1\n1,7,3,3,10,10,1,1,1\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("lines 1 and 3"), std::string::npos) << msg;
    }
}

TEST(ParseGroundTruth, GroupedByIdentity) {
    const auto gt = gt_from("1,2,0,0,1,1,1,1,1\n1,1,0,0,1,1,1,1,1\n2,2,0,0,1,1,1,1,1\n2,1,0,0,1,1,1,1,1\n");
    ASSERT_EQ(gt.size(), 4u);
    EXPECT_EQ(gt[0].identity, 1);
    EXPECT_EQ(gt[1].identity, 1);
    EXPECT_EQ(gt[2].identity, 2);
    EXPECT_EQ(gt[3].identity, 2);
}

TEST(WriteTrajectories, ExactLineFormat) {
    std::ostringstream out;
    write_trajectories({TrajectoryRecord{1, 2, kDefaultClass, {1, 2, 3, 4}, 0.5}}, out);
    EXPECT_EQ(out.str(), "1,2,1.00,2.00,3.00,4.00,0.50,-1,-1,-1\n");
}

TEST(WriteTrajectories, EmptyListGivesEmptyFile) {
    std::ostringstream out;
    write_trajectories({}, out);
    EXPECT_EQ(out.str(), "");
}

TEST(WriteTrajectories, SortedByFrameThenId) {
    std::ostringstream out;
    write_trajectories({TrajectoryRecord{2, 1, 1, {0, 0, 1, 1}, 1},
                        TrajectoryRecord{1, 5, 1, {0, 0, 1, 1}, 1},
                        TrajectoryRecord{1, 3, 1, {0, 0, 1, 1}, 1}},
                       out);
    EXPECT_EQ(out.str().substr(0, 4), "1,3,");
    std::istringstream in(out.str());
    const auto back = parse_trajectories(in);
    EXPECT_EQ(back[1].identity, 5);
    EXPECT_EQ(back[2].frame, 2);
}

TEST(WriteTrajectories, RoundTripWithinPrintPrecision) {
    const double kTol = 0.005 + 1e-9;  // half of the last printed decimal
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> pos(-50, 2000), ext(0.5, 400), score(0, 1);
    std::vector<TrajectoryRecord> recs;
    for (int i = 0; i < 1000; ++i) {
        recs.push_back(TrajectoryRecord{1 + i / 10, 1 + i % 10, kDefaultClass,
                                        {pos(rng), pos(rng), ext(rng), ext(rng)}, score(rng)});
    }
    std::ostringstream out;
    write_trajectories(recs, out);
    std::istringstream in(out.str());
    const auto back = parse_trajectories(in);
    ASSERT_EQ(back.size(), recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        EXPECT_EQ(back[i].frame, recs[i].frame);
        EXPECT_EQ(back[i].identity, recs[i].identity);
        EXPECT_LE(std::abs(back[i].box.left - recs[i].box.left), kTol);
        EXPECT_LE(std::abs(back[i].box.top - recs[i].box.top), kTol);
        EXPECT_LE(std::abs(back[i].box.width - recs[i].box.width), kTol);
        EXPECT_LE(std::abs(back[i].box.height - recs[i].box.height), kTol);
        EXPECT_LE(std::abs(back[i].score - recs[i].score), kTol);
    }
}

TEST(WriteTrajectories, UnwritablePathIsIoError) {
    EXPECT_THROW(write_trajectories({}, std::filesystem::path("/nonexistent-dir/x/out.txt")), IoError);
}

TEST(SequenceInfo, Keys) {
    std::istringstream in("[Sequence]\nname=S\nseqLength=600\nimWidth=1920\nimHeight=1080\n");
    const auto info = load_sequence_info(in);
    EXPECT_EQ(info.frame_count, 600);
    EXPECT_EQ(info.image_width, 1920);
    EXPECT_EQ(info.image_height, 1080);
    EXPECT_DOUBLE_EQ(info.frame_rate, 30.0);
}

TEST(SequenceInfo, MissingKeyNamed) {
    std::istringstream in("[Sequence]\nname=S\nseqLength=600\nimHeight=1080\n");
    try {
        load_sequence_info(in);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("imWidth"), std::string::npos);
    }
}

TEST(Appearance, SidecarAttachesNormalizedHistograms) {
    auto f = dets_from("1,-1,0,0,5,5,0.5\n1,-1,9,9,5,5,0.9\n2,-1,0,0,5,5,0.7\n");
    std::istringstream side("1,1,1,3\n2,0,2,2\n");
    EXPECT_EQ(attach_appearance(f.detections, side), 2u);
    // Frame 1 is sorted by confidence, so row 1 (conf 0.9) comes first.
    ASSERT_TRUE(f.detections[0].appearance);
    EXPECT_DOUBLE_EQ((*f.detections[0].appearance)[0], 0.25);
    EXPECT_FALSE(f.detections[1].appearance);
    EXPECT_DOUBLE_EQ((*f.detections[2].appearance)[1], 0.5);
}

TEST(Fixtures, MotLayoutFilesParse) {
    const auto det = parse_detections(kFixtures / "mot_layout/det/det.txt");
    EXPECT_EQ(det.detections.size(), 117u);
    EXPECT_TRUE(det.rescaled);
    const auto gt = parse_ground_truth(kFixtures / "mot_layout/gt/gt.txt");
    EXPECT_EQ(gt.size(), 120u);
    EXPECT_EQ(std::count_if(gt.begin(), gt.end(), [](const auto& r) { return r.ignore; }), 30);
    const auto info = load_sequence_info(kFixtures / "mot_layout/seqinfo.ini");
    EXPECT_EQ(info.name, "MOT-LAYOUT-01");
    EXPECT_EQ(info.frame_count, 30);
    EXPECT_DOUBLE_EQ(info.frame_rate, 25.0);
}
