#include "test_support.hpp"
#include "touchless/gesture.hpp"
#include "touchless/trace.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace touchless;
using test::make_hand;

namespace
{
    std::vector<StepResult> run(const std::vector<LandmarkFrame> &frames, const ModeConfig &cfg = {})
    {
        GestureEngine engine(cfg);
        std::vector<StepResult> out;
        for (const auto &f : frames)
            out.push_back(engine.process(f));
        return out;
    }

    // Index tip of a shift hand placed at pixel (x, y) for a 1280x720 frame.
    LandmarkFrame shift_at(double x, double y, std::uint64_t id, std::uint32_t w = 1280, std::uint32_t h = 720)
    {
        auto f = make_hand(test::shift_hand(), w, h, id, id * 33333);
        const auto &tip = f.landmarks[lm::index_tip];
        return test::translate(f, x / w - tip.x, y / h - tip.y);
    }

    LandmarkFrame pinch_at(double pinch_px, std::uint64_t id, std::uint32_t w = 1280, std::uint32_t h = 720)
    {
        return make_hand(test::pinch_hand(pinch_px / w), w, h, id, id * 33333);
    }

    const double kDiag = std::sqrt(1280.0 * 1280.0 + 720.0 * 720.0);
}

TEST(FingerPose, ExtensionAndDepth)
{
    auto f = make_hand(test::shift_hand());
    const auto pose = finger_pose(f, 1.3);
    EXPECT_TRUE(pose.is_extended(Finger::index));   // tip twice as far as the pip: 2.0 >= 1.3
    EXPECT_FALSE(pose.is_extended(Finger::middle)); // tip on the pip: 1.0 < 1.3

    test::HandSpec spec;
    spec.tip_z[1] = -0.05;
    const auto depth_pose = finger_pose(make_hand(spec), 1.3);
    EXPECT_DOUBLE_EQ(depth_pose.depth(Finger::index), 0.05);
    EXPECT_DOUBLE_EQ(finger_pose(make_hand(spec), 1.3, -1.0).depth(Finger::index), -0.05);
}

TEST(SelectMode, ShiftFixtureMatchesHandEvaluatedPredicates)
{
    const auto f = make_hand(test::shift_hand());
    // Straight-line evaluation of each predicate on the raw landmarks.
    const auto &w = f.landmarks[0];
    auto d = [&](std::size_t i) { return std::hypot(f.landmarks[i].x - w.x, f.landmarks[i].y - w.y); };
    const bool index_ext = d(8) >= 1.3 * d(6);
    const bool middle_ext = d(12) >= 1.3 * d(10);
    const double rd_index = w.z - f.landmarks[8].z, rd_middle = w.z - f.landmarks[12].z;
    const double pinch = std::hypot((f.landmarks[8].x - f.landmarks[4].x) * 1280, (f.landmarks[8].y - f.landmarks[4].y) * 720);
    ASSERT_TRUE(index_ext);
    ASSERT_FALSE(middle_ext);
    ASSERT_DOUBLE_EQ(rd_index, 0.08);
    ASSERT_DOUBLE_EQ(rd_middle, 0.01);
    ASSERT_GT(pinch / kDiag, 0.06);
    ASSERT_TRUE(rd_index > 0.04 && rd_index > rd_middle + 0.015);

    const EffectiveConfig cfg = effective(ModeConfig{});
    const auto pose = finger_pose(f, cfg);
    EXPECT_EQ(raw_mode(pose, pinch_distance(f), f.diagonal(), cfg), Mode::shift);
    GestureState committed;
    committed.mode = Mode::shift;
    EXPECT_EQ(select_mode(pose, pinch_distance(f), f.diagonal(), cfg, committed).mode, Mode::shift);
}

TEST(SelectMode, ZoomAndMiddleExtension)
{
    const EffectiveConfig cfg = effective(ModeConfig{});
    auto f = pinch_at(40, 1);
    auto pose = finger_pose(f, cfg);
    EXPECT_EQ(raw_mode(pose, pinch_distance(f), f.diagonal(), cfg), Mode::zoom);

    auto spec = test::pinch_hand(40.0 / 1280);
    spec.extended[2] = true;
    auto g = make_hand(spec);
    pose = finger_pose(g, cfg);
    EXPECT_NE(raw_mode(pose, pinch_distance(g), g.diagonal(), cfg), Mode::zoom);

    auto ring = test::pinch_hand(40.0 / 1280);
    ring.extended[3] = true;
    auto r = make_hand(ring);
    EXPECT_NE(raw_mode(finger_pose(r, cfg), pinch_distance(r), r.diagonal(), cfg), Mode::zoom);
}

TEST(SelectMode, NoPredicateFires)
{
    const EffectiveConfig cfg = effective(ModeConfig{});
    // all fingers curled, thumb far from the index tip
    test::HandSpec curled;
    curled.place_thumb = true;
    curled.thumb_x = 0.1;
    const auto f = make_hand(curled);
    EXPECT_EQ(raw_mode(finger_pose(f, cfg), pinch_distance(f), f.diagonal(), cfg), Mode::none);

    LandmarkFrame absent;
    auto r = step(absent, GestureState{}, cfg);
    EXPECT_EQ(r.state.mode, Mode::none);
    EXPECT_TRUE(r.command.empty());
}

TEST(SelectMode, HysteresisCommitsAfterConfiguredFrames)
{
    ModeConfig cfg;
    cfg.hysteresis_frames = 3;
    auto results = run({shift_at(640, 360, 1), shift_at(640, 360, 2), shift_at(640, 360, 3), shift_at(640, 360, 4)}, cfg);
    EXPECT_EQ(results[0].state.mode, Mode::none);
    EXPECT_EQ(results[1].state.mode, Mode::none);
    EXPECT_EQ(results[2].state.mode, Mode::shift);

    cfg.hysteresis_frames = 0;
    EXPECT_EQ(run({shift_at(640, 360, 1)}, cfg)[0].state.mode, Mode::shift);
}

TEST(Step, ShiftDeltaIsDiagonalNormalized)
{
    auto r = run({shift_at(640, 360, 1), shift_at(640, 360, 2), shift_at(650, 360, 3)});
    EXPECT_EQ(r[1].state.mode, Mode::shift);
    EXPECT_TRUE(r[1].command.empty()); // entry frame
    ASSERT_EQ(r[2].command.kind, Mode::shift);
    EXPECT_NEAR(r[2].command.dx, 0.006809183883785541, 1e-9);
    EXPECT_NEAR(r[2].command.dy, 0.0, 1e-12);
    EXPECT_EQ(r[2].command.dzoom, 0.0);
}

TEST(Step, PinchDistanceAndStaticZoom)
{
    LandmarkFrame f;
    f.width = 1000;
    f.height = 1000;
    f.hand_present = true;
    f.landmarks.assign(kLandmarkCount, Landmark{});
    f.landmarks[lm::index_tip] = {0.103, 0.104, 0};
    f.landmarks[lm::thumb_tip] = {0.100, 0.100, 0};
    EXPECT_NEAR(pinch_distance(f), 5.0, 1e-9);

    LandmarkFrame g = f;
    g.width = 1;
    g.height = 1;
    g.landmarks[lm::index_tip] = {0.75, 1.0, 0};
    g.landmarks[lm::thumb_tip] = {0.0, 0.0, 0};
    EXPECT_DOUBLE_EQ(pinch_distance(g), 1.25);

    auto r = run({pinch_at(80, 1), pinch_at(80, 2), pinch_at(80, 3)});
    EXPECT_EQ(r[2].state.mode, Mode::zoom);
    EXPECT_TRUE(r[2].command.empty());
}

TEST(Step, HandLossEndsTheGesture)
{
    LandmarkFrame lost;
    lost.frame_id = 4;
    auto r = run({shift_at(640, 360, 1), shift_at(640, 360, 2), shift_at(660, 360, 3), lost});
    EXPECT_EQ(r[3].state.mode, Mode::none);
    EXPECT_TRUE(r[3].command.empty());
    EXPECT_FALSE(r[3].state.prev_tip);
}

TEST(Effective, SensitivityScaling)
{
    ModeConfig base;
    const auto one = effective(base);
    EXPECT_EQ(one.depth_threshold, base.depth_threshold);
    EXPECT_EQ(one.shift_gain, base.shift_gain);
    EXPECT_EQ(one.dead_zone, base.dead_zone);
    EXPECT_EQ(one.pinch_engage, base.pinch_engage);

    base.sensitivity = 2.0;
    const auto two = effective(base);
    EXPECT_DOUBLE_EQ(two.depth_threshold, 0.02);
    EXPECT_DOUBLE_EQ(two.depth_delta_margin, 0.0075);
    EXPECT_DOUBLE_EQ(two.dead_zone, 0.00075);
    EXPECT_DOUBLE_EQ(two.shift_gain, 2.0);
    EXPECT_DOUBLE_EQ(two.zoom_gain, 2.0);
    EXPECT_DOUBLE_EQ(two.extension_ratio, 1.3);

    for (double s : {0.0, -1.0, std::nan("")})
    {
        base.sensitivity = s;
        EXPECT_THROW(effective(base), ConfigInvalid);
    }
    ModeConfig bad;
    bad.dead_zone = 0.0;
    EXPECT_THROW(effective(bad), ConfigInvalid);
    bad = {};
    bad.hysteresis_frames = -1;
    EXPECT_THROW(effective(bad), ConfigInvalid);
}

// Frames whose predicate quantities clear every threshold by a factor of two at s = 1 keep
// their raw mode at s = 2.
TEST(Effective, DoublingSensitivityPreservesRobustModes)
{
    const auto frames = read_trace(test::data_path("data/golden.ndjson"));
    ModeConfig c1, c2;
    c2.sensitivity = 2.0;
    const auto e1 = effective(c1), e2 = effective(c2);
    std::size_t robust = 0;
    for (const auto &f : frames)
    {
        if (!f.hand_present)
            continue;
        const auto &w = f.landmarks[0];
        const double rd_i = w.z - f.landmarks[8].z, rd_m = w.z - f.landmarks[12].z;
        const double pinch = std::hypot((f.landmarks[8].x - f.landmarks[4].x) * f.width,
                                        (f.landmarks[8].y - f.landmarks[4].y) * f.height) / f.diagonal();
        auto far = [](double v, double thr) { return v >= 2 * thr || v <= thr / 2; };
        if (!far(rd_i, 0.04) || !far(rd_m, 0.04) || !far(std::abs(rd_i - rd_m), 0.015) || !far(pinch, 0.06))
            continue;
        ++robust;
        const auto p = finger_pose(f, 1.3);
        EXPECT_EQ(raw_mode(p, pinch_distance(f), f.diagonal(), e1), raw_mode(p, pinch_distance(f), f.diagonal(), e2))
            << "frame " << f.frame_id;
    }
    EXPECT_GT(robust, 500u);
}

TEST(Properties, ShiftRotateMutuallyExclusive)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> depth(-0.1, 0.25), margin(1e-6, 0.05), thr(1e-4, 0.1);
    for (int i = 0; i < 10000; ++i)
    {
        FingerPose pose;
        for (std::size_t k = 0; k < kFingerCount; ++k)
        {
            pose.extended[k] = rng() % 2 == 0;
            pose.rel_depth[k] = depth(rng);
        }
        ModeConfig cfg;
        cfg.depth_delta_margin = margin(rng);
        cfg.depth_threshold = thr(rng);
        const auto eff = effective(cfg);
        ASSERT_FALSE(shift_predicate(pose, eff) && rotate_predicate(pose, eff));
    }
}

TEST(Properties, Determinism)
{
    const auto frames = read_trace(test::data_path("data/golden.ndjson"));
    const auto a = run(frames), b = run(frames);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        ASSERT_EQ(a[i].command, b[i].command);
        ASSERT_EQ(a[i].state, b[i].state);
    }
}

TEST(Properties, FirstFrameAfterSwitchIsSilent)
{
    const auto frames = read_trace(test::data_path("data/golden.ndjson"));
    const auto r = run(frames);
    std::size_t switches = 0;
    Mode prev = Mode::none;
    for (const auto &s : r)
    {
        if (s.state.mode != prev)
        {
            ++switches;
            EXPECT_TRUE(s.command.empty());
        }
        prev = s.state.mode;
    }
    EXPECT_GT(switches, 20u);
}

TEST(Properties, ZoomSignFollowsPinchDirection)
{
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 200; ++trial)
    {
        const bool opening = trial % 2 == 0;
        const double start = 10 + static_cast<double>(rng() % 20), step_px = 2.3 + static_cast<double>(rng() % 40) / 10.0;
        std::vector<LandmarkFrame> frames;
        for (int i = 0; i < 15; ++i)
        {
            const double d = opening ? start + step_px * i : start + step_px * (14 - i);
            frames.push_back(pinch_at(d, static_cast<std::uint64_t>(i + 1)));
        }
        std::size_t zooms = 0;
        for (const auto &s : run(frames))
        {
            if (s.command.kind != Mode::zoom)
                continue;
            ++zooms;
            if (opening)
                EXPECT_GT(s.command.dzoom, 0.0);
            else
                EXPECT_LT(s.command.dzoom, 0.0);
        }
        EXPECT_GT(zooms, 0u);
    }
}

TEST(Properties, MiddleExtensionAbortsZoomOnSameFrame)
{
    ModeConfig cfg;
    cfg.hysteresis_frames = 5;
    std::vector<LandmarkFrame> frames;
    for (std::uint64_t i = 1; i <= 8; ++i)
        frames.push_back(pinch_at(40.0 + static_cast<double>(i) * 3, i));
    auto spec = test::pinch_hand(64.0 / 1280);
    spec.extended[2] = true;
    frames.push_back(make_hand(spec, 1280, 720, 9, 9 * 33333));
    const auto r = run(frames, cfg);
    ASSERT_EQ(r[7].state.mode, Mode::zoom);
    EXPECT_NE(r[8].state.mode, Mode::zoom);
    EXPECT_TRUE(r[8].command.empty());
}

TEST(Properties, StaticHandEmitsOnlyEmptyActions)
{
    for (auto spec : {test::shift_hand(), test::rotate_hand(), test::pinch_hand(0.03)})
    {
        std::vector<LandmarkFrame> frames;
        for (std::uint64_t i = 1; i <= 30; ++i)
            frames.push_back(make_hand(spec, 1280, 720, i, i * 33333));
        const auto r = run(frames);
        EXPECT_NE(r.back().state.mode, Mode::none);
        for (const auto &s : r)
            EXPECT_TRUE(s.command.empty());
    }
}

TEST(Properties, GainLinearity)
{
    const auto frames = read_trace(test::data_path("data/golden.ndjson"));
    ModeConfig scaled;
    scaled.shift_gain = 3.5;
    const auto a = run(frames), b = run(frames, scaled);
    std::size_t shifts = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        ASSERT_EQ(a[i].state.mode, b[i].state.mode);
        ASSERT_EQ(a[i].command.kind, b[i].command.kind);
        if (a[i].command.kind == Mode::shift)
        {
            ++shifts;
            EXPECT_DOUBLE_EQ(b[i].command.dx, 3.5 * a[i].command.dx);
            EXPECT_DOUBLE_EQ(b[i].command.dy, 3.5 * a[i].command.dy);
        }
        else
        {
            EXPECT_EQ(a[i].command, b[i].command);
        }
    }
    EXPECT_GT(shifts, 100u);
}

TEST(Properties, ResolutionIndependence)
{
    auto frames = read_trace(test::data_path("data/golden.ndjson"));
    auto hd = frames;
    for (auto &f : hd)
    {
        f.width = 1920;
        f.height = 1080;
    }
    const auto a = run(frames), b = run(hd);
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        ASSERT_EQ(a[i].state.mode, b[i].state.mode);
        ASSERT_EQ(a[i].command.kind, b[i].command.kind);
        EXPECT_NEAR(a[i].command.dx, b[i].command.dx, 1e-9);
        EXPECT_NEAR(a[i].command.dy, b[i].command.dy, 1e-9);
        EXPECT_NEAR(a[i].command.dzoom, b[i].command.dzoom, 1e-9);
    }
}
