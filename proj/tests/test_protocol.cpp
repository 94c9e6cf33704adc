#include "touchless/protocol.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace touchless;

TEST(Protocol, EncodesFixedLayouts)
{
    EXPECT_EQ(encode_command({7, {Mode::shift, 0.5, -0.25, 0.0}}),
              R"({"seq":7,"kind":"SHIFT","dx":0.5,"dy":-0.25,"dzoom":0})");
    EXPECT_EQ(encode_mode_change(Mode::zoom, 42), R"({"mode":"ZOOM","frame_id":42})");
    EXPECT_EQ(encode_pong(123, 456), R"({"pong":123,"t_engine_us":456})");
}

TEST(Protocol, CommandRoundTripIsExact)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 2000; ++i)
    {
        SequencedCommand c{rng(), {static_cast<Mode>(1 + rng() % 3), u(rng) * 1e-3, u(rng), u(rng) * 1e5}};
        const auto back = decode_command(encode_command(c));
        ASSERT_EQ(back.seq, c.seq);
        ASSERT_EQ(back.command, c.command);
    }
}

TEST(Protocol, RejectsMalformedCommands)
{
    EXPECT_THROW(decode_command("{"), MalformedMessage);
    EXPECT_THROW(decode_command(R"({"seq":1,"kind":"PAN","dx":0,"dy":0,"dzoom":0})"), MalformedMessage);
    EXPECT_THROW(decode_command(R"({"seq":-1,"kind":"SHIFT","dx":0,"dy":0,"dzoom":0})"), MalformedMessage);
    EXPECT_THROW(decode_command(R"({"seq":1,"kind":"SHIFT","dx":"a","dy":0,"dzoom":0})"), MalformedMessage);
}

TEST(Protocol, ControlMessages)
{
    auto ping = control_from_json(nlohmann::json::parse(R"({"ping":99})"));
    ASSERT_TRUE(ping);
    EXPECT_EQ(ping->kind, ControlMessage::Kind::ping);
    EXPECT_EQ(ping->value, 99u);

    auto ack = control_from_json(nlohmann::json::parse(R"({"cmd_seq":5,"t_presented_us":1000})"));
    ASSERT_TRUE(ack);
    EXPECT_EQ(ack->kind, ControlMessage::Kind::ack);
    EXPECT_EQ(ack->value, 5u);
    EXPECT_EQ(ack->t_presented_us, 1000u);

    EXPECT_FALSE(control_from_json(nlohmann::json::parse(R"({"frame_id":1})")));
    EXPECT_FALSE(control_from_json(nlohmann::json::parse("[1]")));
    EXPECT_THROW(control_from_json(nlohmann::json::parse(R"({"cmd_seq":5})")), MalformedMessage);
    EXPECT_THROW(control_from_json(nlohmann::json::parse(R"({"ping":"x"})")), MalformedMessage);
}
