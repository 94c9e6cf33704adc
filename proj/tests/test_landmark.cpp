#include "test_support.hpp"
#include "touchless/trace.hpp"
#include "touchless/wire.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace touchless;

namespace
{
    LandmarkFrame random_frame(std::mt19937_64 &rng, std::uint64_t id)
    {
        std::uniform_real_distribution<double> unit(0.0, 1.0), depth(-0.3, 0.3);
        LandmarkFrame f;
        f.frame_id = id;
        f.t_capture_us = id * 33333 + rng() % 1000;
        f.width = 1 + static_cast<std::uint32_t>(rng() % 4096);
        f.height = 1 + static_cast<std::uint32_t>(rng() % 4096);
        f.hand_present = rng() % 4 != 0;
        if (f.hand_present)
        {
            for (std::size_t i = 0; i < kLandmarkCount; ++i)
                f.landmarks.push_back({unit(rng), unit(rng), depth(rng)});
        }
        return f;
    }
}

TEST(ToPixels, Examples)
{
    EXPECT_EQ(to_pixels(Landmark{0.5, 0.5, 0}, 1280, 720), (PixelPoint{640.0, 360.0}));
    EXPECT_EQ(to_pixels(Landmark{0.0, 1.0, 0}, 1280, 720), (PixelPoint{0.0, 720.0}));
    auto p = to_pixels(Landmark{0.37, 0.81, 0}, 1280, 720);
    EXPECT_NEAR(p.x, 473.6, 1e-9);
    EXPECT_NEAR(p.y, 583.2, 1e-9);
}

TEST(ToPixels, LinearInX)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> half(0.0, 0.5);
    for (int i = 0; i < 1000; ++i)
    {
        const double x = half(rng);
        const auto w = 1 + static_cast<std::uint32_t>(rng() % 5000);
        EXPECT_DOUBLE_EQ(to_pixels(Landmark{2 * x, 0, 0}, w, 1).x, 2 * to_pixels(Landmark{x, 0, 0}, w, 1).x);
    }
}

TEST(Wire, RoundTripAndDeterminism)
{
    std::mt19937_64 rng(11);
    for (std::uint64_t i = 1; i <= 500; ++i)
    {
        const auto f = random_frame(rng, i);
        const auto bytes = encode_wire_frame(f);
        EXPECT_EQ(bytes, encode_wire_frame(f));
        EXPECT_EQ(decode_wire_frame(bytes), f);
    }
}

TEST(Wire, EmptyHandOmitsLandmarks)
{
    LandmarkFrame f;
    f.frame_id = 7;
    f.t_capture_us = 1000;
    const auto bytes = encode_wire_frame(f);
    EXPECT_EQ(bytes, R"({"frame_id":7,"t_capture_us":1000,"w":1280,"h":720,"hand":false})");
    EXPECT_EQ(bytes.find("lm"), std::string::npos);
}

TEST(Wire, SchemaViolations)
{
    auto f = test::make_hand(test::shift_hand());
    auto short_frame = f;
    short_frame.landmarks.pop_back();
    EXPECT_THROW(decode_wire_frame(encode_wire_frame(short_frame)), SchemaViolation);

    auto wide = f;
    wide.landmarks[3].x = 1.3;
    EXPECT_THROW(decode_wire_frame(encode_wire_frame(wide)), SchemaViolation);

    EXPECT_THROW(decode_wire_frame(R"({"frame_id":1,"t_capture_us":0,"w":0,"h":720,"hand":false})"), SchemaViolation);
    EXPECT_THROW(decode_wire_frame(R"({"frame_id":1,"t_capture_us":0,"w":10,"h":10,"hand":true})"), SchemaViolation);
    EXPECT_THROW(decode_wire_frame(R"({"frame_id":1,"t_capture_us":0,"w":10,"h":10,"hand":false,"lm":[]})"), SchemaViolation);
    std::string overflow = encode_wire_frame(f);
    overflow.replace(overflow.find("[[") + 2, 1, "1e999,");
    EXPECT_THROW(decode_wire_frame(overflow), std::runtime_error);
}

TEST(Wire, MalformedMessages)
{
    EXPECT_THROW(decode_wire_frame("not json"), MalformedMessage);
    EXPECT_THROW(decode_wire_frame("[1,2,3]"), MalformedMessage);
    EXPECT_THROW(decode_wire_frame(R"({"frame_id":-1,"t_capture_us":0,"w":1,"h":1,"hand":false})"), MalformedMessage);
    EXPECT_THROW(decode_wire_frame(R"({"frame_id":1,"t_capture_us":0,"w":1,"h":1,"hand":"yes"})"), MalformedMessage);
    EXPECT_THROW(decode_wire_frame(R"({"frame_id":1,"t_capture_us":0,"w":1,"h":1,"hand":true,"lm":[[0,0]]})"),
                 MalformedMessage);
    EXPECT_THROW(decode_wire_frame(R"({"frame_id":1,"t_capture_us":0,"w":99999999999,"h":1,"hand":false})"),
                 MalformedMessage);
}

// Every byte sequence either parses or raises one of the two typed errors.
TEST(Wire, ValidationIsTotal)
{
    std::mt19937_64 rng(5);
    const std::string seed = encode_wire_frame(test::make_hand(test::rotate_hand()));
    for (int i = 0; i < 5000; ++i)
    {
        std::string s = seed;
        const int edits = 1 + static_cast<int>(rng() % 6);
        for (int e = 0; e < edits; ++e)
        {
            const auto pos = rng() % s.size();
            switch (rng() % 3)
            {
            case 0:
                s[pos] = static_cast<char>(rng() % 256);
                break;
            case 1:
                s.erase(pos, 1 + rng() % 8);
                break;
            default:
                s.insert(pos, 1, "0123456789.,[]{}:\"-e"[rng() % 20]);
            }
            if (s.empty())
                s = "{";
        }
        try
        {
            (void)decode_wire_frame(s);
        }
        catch (const MalformedMessage &)
        {
        }
        catch (const SchemaViolation &)
        {
        }
    }
}

TEST(Trace, WriteReadRoundTrip)
{
    std::vector<LandmarkFrame> frames;
    for (std::uint64_t i = 0; i < 3; ++i)
        frames.push_back(test::make_hand(test::shift_hand(), 1280, 720, i + 1, i * 33333));
    frames[1].hand_present = false;
    frames[1].landmarks.clear();
    const auto path = test::temp_path("three.ndjson");
    write_trace(path, frames);
    EXPECT_EQ(read_trace(path), frames);
}

TEST(Trace, EmptyFileIsEmptySequence)
{
    const auto path = test::temp_path("empty.ndjson");
    std::ofstream(path).close();
    EXPECT_TRUE(read_trace(path).empty());
}

TEST(Trace, DecreasingFrameIdIsRejectedWithLine)
{
    std::stringstream ss;
    write_trace(ss, {test::make_hand(test::shift_hand(), 1280, 720, 5, 0), test::make_hand(test::shift_hand(), 1280, 720, 4, 10)});
    try
    {
        read_trace(ss);
        FAIL() << "expected MalformedTrace";
    }
    catch (const MalformedTrace &e)
    {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(Trace, Errors)
{
    EXPECT_THROW(read_trace(std::filesystem::path("/nonexistent/trace.ndjson")), IoFailure);
    std::stringstream wrong_schema("# ts-trace/9\n");
    EXPECT_THROW(read_trace(wrong_schema), MalformedTrace);
    std::stringstream garbage("# ts-trace/1\n{oops\n");
    try
    {
        read_trace(garbage);
        FAIL();
    }
    catch (const MalformedTrace &e)
    {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Trace, GoldenTraceParses)
{
    auto frames = read_trace(test::data_path("data/golden.ndjson"));
    EXPECT_GT(frames.size(), 2500u);
}
