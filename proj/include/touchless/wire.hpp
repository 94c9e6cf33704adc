#pragma once

#include "touchless/landmark.hpp"

#include <json.hpp>

#include <charconv>
#include <limits>
#include <string>
#include <string_view>

namespace touchless
{
    /// Raised for wire messages that are not syntactically a frame.
    class MalformedMessage : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    namespace detail
    {
        // Shortest representation that parses back to the same double.
        inline void append_number(std::string &out, double v)
        {
            char buf[32];
            auto res = std::to_chars(buf, buf + sizeof(buf), v);
            out.append(buf, res.ptr);
        }

        inline void append_number(std::string &out, std::uint64_t v)
        {
            char buf[24];
            auto res = std::to_chars(buf, buf + sizeof(buf), v);
            out.append(buf, res.ptr);
        }

        template <typename T>
        T require_unsigned(const nlohmann::json &obj, const char *key)
        {
            auto it = obj.find(key);
            if (it == obj.end())
            {
                throw MalformedMessage(std::string("missing field '") + key + "'");
            }
            if (!it->is_number_unsigned())
            {
                throw MalformedMessage(std::string("field '") + key + "' must be an unsigned integer");
            }
            auto v = it->get<std::uint64_t>();
            if (v > std::numeric_limits<T>::max())
            {
                throw MalformedMessage(std::string("field '") + key + "' out of range");
            }
            return static_cast<T>(v);
        }
    }

    /// One NDJSON line without the trailing newline. Field order is fixed, so equal frames encode to equal bytes.
    inline std::string encode_wire_frame(const LandmarkFrame &f)
    {
        std::string out;
        out.reserve(f.hand_present ? 1400 : 96);
        out += "{\"frame_id\":";
        detail::append_number(out, f.frame_id);
        out += ",\"t_capture_us\":";
        detail::append_number(out, f.t_capture_us);
        out += ",\"w\":";
        detail::append_number(out, static_cast<std::uint64_t>(f.width));
        out += ",\"h\":";
        detail::append_number(out, static_cast<std::uint64_t>(f.height));
        out += f.hand_present ? ",\"hand\":true" : ",\"hand\":false";
        if (f.hand_present)
        {
            out += ",\"lm\":[";
            for (std::size_t i = 0; i < f.landmarks.size(); ++i)
            {
                const auto &l = f.landmarks[i];
                if (i != 0)
                {
                    out += ',';
                }
                out += '[';
                detail::append_number(out, l.x);
                out += ',';
                detail::append_number(out, l.y);
                out += ',';
                detail::append_number(out, l.z);
                out += ']';
            }
            out += ']';
        }
        out += '}';
        return out;
    }

    /// Parses one already-parsed JSON object as a frame. Throws MalformedMessage or SchemaViolation.
    inline LandmarkFrame frame_from_json(const nlohmann::json &j)
    {
        if (!j.is_object())
        {
            throw MalformedMessage("frame message must be a JSON object");
        }
        LandmarkFrame f;
        f.frame_id = detail::require_unsigned<std::uint64_t>(j, "frame_id");
        f.t_capture_us = detail::require_unsigned<std::uint64_t>(j, "t_capture_us");
        f.width = detail::require_unsigned<std::uint32_t>(j, "w");
        f.height = detail::require_unsigned<std::uint32_t>(j, "h");
        auto hand = j.find("hand");
        if (hand == j.end() || !hand->is_boolean())
        {
            throw MalformedMessage("field 'hand' must be a boolean");
        }
        f.hand_present = hand->get<bool>();
        auto lms = j.find("lm");
        if (lms != j.end())
        {
            if (!f.hand_present)
            {
                throw SchemaViolation("'lm' present on a hand-absent frame");
            }
            if (!lms->is_array())
            {
                throw MalformedMessage("field 'lm' must be an array");
            }
            f.landmarks.reserve(lms->size());
            for (const auto &p : *lms)
            {
                if (!p.is_array() || p.size() != 3 || !p[0].is_number() || !p[1].is_number() || !p[2].is_number())
                {
                    throw MalformedMessage("each landmark must be a [x,y,z] number triple");
                }
                f.landmarks.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
            }
        }
        else if (f.hand_present)
        {
            throw SchemaViolation("hand-present frame without 'lm'");
        }
        validate(f);
        return f;
    }

    inline LandmarkFrame decode_wire_frame(std::string_view bytes)
    {
        while (!bytes.empty() && (bytes.back() == '\n' || bytes.back() == '\r'))
        {
            bytes.remove_suffix(1);
        }
        nlohmann::json j;
        try
        {
            j = nlohmann::json::parse(bytes.begin(), bytes.end());
        }
        catch (const nlohmann::json::exception &e)
        {
            throw MalformedMessage(e.what());
        }
        try
        {
            return frame_from_json(j);
        }
        catch (const nlohmann::json::exception &e)
        {
            throw MalformedMessage(e.what());
        }
    }
}
