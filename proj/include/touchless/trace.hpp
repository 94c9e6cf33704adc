#pragma once

#include "touchless/wire.hpp"

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace touchless
{
    inline constexpr std::string_view kTraceSchema = "ts-trace/1";

    class IoFailure : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    class MalformedTrace : public std::runtime_error
    {
    public:
        MalformedTrace(std::size_t line, const std::string &what)
            : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
        {
        }

        std::size_t line() const noexcept { return line_; }

    private:
        std::size_t line_;
    };

    inline std::vector<LandmarkFrame> read_trace(std::istream &in)
    {
        std::vector<LandmarkFrame> frames;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line))
        {
            ++line_no;
            if (!line.empty() && line.back() == '\r')
            {
                line.pop_back();
            }
            if (line.empty())
            {
                continue;
            }
            if (line.front() == '#')
            {
                if (line_no != 1)
                {
                    throw MalformedTrace(line_no, "header line only allowed on line 1");
                }
                if (line.find(kTraceSchema) == std::string::npos)
                {
                    throw MalformedTrace(line_no, "unsupported trace schema, expected " + std::string(kTraceSchema));
                }
                continue;
            }
            LandmarkFrame f;
            try
            {
                f = decode_wire_frame(line);
            }
            catch (const std::exception &e)
            {
                throw MalformedTrace(line_no, e.what());
            }
            if (!frames.empty())
            {
                if (f.frame_id <= frames.back().frame_id)
                {
                    throw MalformedTrace(line_no, "frame_id must strictly increase");
                }
                if (f.t_capture_us < frames.back().t_capture_us)
                {
                    throw MalformedTrace(line_no, "t_capture_us must not decrease");
                }
            }
            frames.push_back(std::move(f));
        }
        if (in.bad())
        {
            throw IoFailure("read error after line " + std::to_string(line_no));
        }
        return frames;
    }

    inline std::vector<LandmarkFrame> read_trace(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
        {
            throw IoFailure("cannot open trace " + path.string());
        }
        return read_trace(in);
    }

    inline void write_trace(std::ostream &out, const std::vector<LandmarkFrame> &frames)
    {
        out << "# " << kTraceSchema << '\n';
        for (const auto &f : frames)
        {
            out << encode_wire_frame(f) << '\n';
        }
    }

    inline void write_trace(const std::filesystem::path &path, const std::vector<LandmarkFrame> &frames)
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
        {
            throw IoFailure("cannot open trace for writing " + path.string());
        }
        write_trace(out, frames);
        out.flush();
        if (!out)
        {
            throw IoFailure("write failed for " + path.string());
        }
    }
}
