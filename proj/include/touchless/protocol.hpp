#pragma once

#include "touchless/gesture.hpp"
#include "touchless/wire.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace touchless
{
    // Messages on the viewer channel, one JSON object per line:
    //   engine -> viewer   {"seq":N,"kind":"SHIFT","dx":..,"dy":..,"dzoom":..}   command
    //   engine -> viewer   {"mode":"ZOOM","frame_id":N}                          mode change
    //   engine -> peer     {"pong":t0,"t_engine_us":T}                           echo reply
    //   viewer -> engine   {"cmd_seq":N,"t_presented_us":T}                      presentation ack
    //   peer   -> engine   {"ping":t0}                                           echo request
    // The bridge channel carries frames plus ping/pong.

    struct SequencedCommand
    {
        std::uint64_t seq = 0;
        Command command;
    };

    inline std::string encode_command(const SequencedCommand &c)
    {
        std::string out = "{\"seq\":";
        detail::append_number(out, c.seq);
        out += ",\"kind\":\"";
        out += to_string(c.command.kind);
        out += "\",\"dx\":";
        detail::append_number(out, c.command.dx);
        out += ",\"dy\":";
        detail::append_number(out, c.command.dy);
        out += ",\"dzoom\":";
        detail::append_number(out, c.command.dzoom);
        out += '}';
        return out;
    }

    inline std::string encode_mode_change(Mode m, std::uint64_t frame_id)
    {
        std::string out = "{\"mode\":\"";
        out += to_string(m);
        out += "\",\"frame_id\":";
        detail::append_number(out, frame_id);
        out += '}';
        return out;
    }

    inline std::string encode_pong(std::uint64_t t0, std::uint64_t t_engine_us)
    {
        std::string out = "{\"pong\":";
        detail::append_number(out, t0);
        out += ",\"t_engine_us\":";
        detail::append_number(out, t_engine_us);
        out += '}';
        return out;
    }

    /// Throws MalformedMessage.
    inline SequencedCommand decode_command(std::string_view line)
    {
        try
        {
            auto j = nlohmann::json::parse(line.begin(), line.end());
            SequencedCommand c;
            c.seq = detail::require_unsigned<std::uint64_t>(j, "seq");
            auto kind = parse_mode(j.at("kind").get<std::string>());
            if (!kind)
                throw MalformedMessage("unknown command kind");
            c.command = {*kind, j.at("dx").get<double>(), j.at("dy").get<double>(), j.at("dzoom").get<double>()};
            return c;
        }
        catch (const nlohmann::json::exception &e)
        {
            throw MalformedMessage(e.what());
        }
    }

    /// A non-frame message received by the engine.
    struct ControlMessage
    {
        enum class Kind
        {
            ping,
            ack,
        } kind;
        std::uint64_t value = 0; // ping: t0; ack: cmd_seq
        std::uint64_t t_presented_us = 0;
    };

    /// nullopt if the object is not a control message.
    inline std::optional<ControlMessage> control_from_json(const nlohmann::json &j)
    {
        if (!j.is_object())
            return std::nullopt;
        if (j.contains("ping"))
        {
            return ControlMessage{ControlMessage::Kind::ping, detail::require_unsigned<std::uint64_t>(j, "ping"), 0};
        }
        if (j.contains("cmd_seq"))
        {
            return ControlMessage{ControlMessage::Kind::ack, detail::require_unsigned<std::uint64_t>(j, "cmd_seq"),
                                  detail::require_unsigned<std::uint64_t>(j, "t_presented_us")};
        }
        return std::nullopt;
    }
}
