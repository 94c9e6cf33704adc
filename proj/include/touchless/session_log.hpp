#pragma once

#include "touchless/bounded_queue.hpp"
#include "touchless/gesture.hpp"
#include "touchless/trace.hpp"

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace touchless
{
    inline constexpr std::string_view kLogSchema = "tslog/1";

    inline constexpr std::array<std::string_view, 11> kLogColumns = {
        "session_id", "frame_id", "t_capture_us", "mode", "action", "tip_x_px",
        "tip_y_px", "rel_depth", "pinch_px", "proc_ms", "render_ms",
    };

    /// Raised when a log does not follow the tslog/1 layout; the message names the column.
    class SchemaMismatch : public std::runtime_error
    {
    public:
        SchemaMismatch(std::string column, const std::string &what)
            : std::runtime_error(what), column_(std::move(column))
        {
        }

        const std::string &column() const noexcept { return column_; }

    private:
        std::string column_;
    };

    struct FrameRecord
    {
        std::string session_id;
        std::uint64_t frame_id = 0;
        std::uint64_t t_capture_us = 0;
        Mode mode = Mode::none;
        // Kind of the emitted command; nullopt is the empty action.
        std::optional<Mode> action;
        std::optional<double> tip_x_px;
        std::optional<double> tip_y_px;
        std::optional<double> rel_depth;
        std::optional<double> pinch_px;
        double proc_ms = 0.0;
        std::optional<double> render_ms;

        bool has_action() const noexcept { return action.has_value(); }

        friend bool operator==(const FrameRecord &, const FrameRecord &) = default;
    };

    inline bool valid_session_id(std::string_view id) noexcept
    {
        if (id.empty())
        {
            return false;
        }
        for (char c : id)
        {
            if (c == ',' || c == '"' || c == '\n' || c == '\r' || c == ' ' || c == '#')
            {
                return false;
            }
        }
        return true;
    }

    /// Throws std::invalid_argument if the record breaks a row invariant.
    inline void check_record(const FrameRecord &r)
    {
        if (!valid_session_id(r.session_id))
        {
            throw std::invalid_argument("session_id must be non-empty without commas, quotes, spaces or '#'");
        }
        if (r.action && (r.mode == Mode::none || *r.action == Mode::none))
        {
            throw std::invalid_argument("non-empty action requires an active mode");
        }
        if (!(r.proc_ms >= 0.0) || !std::isfinite(r.proc_ms))
        {
            throw std::invalid_argument("proc_ms must be finite and >= 0");
        }
        if (r.render_ms && (!(*r.render_ms >= 0.0) || !std::isfinite(*r.render_ms)))
        {
            throw std::invalid_argument("render_ms must be finite and >= 0");
        }
    }

    inline std::string log_preamble()
    {
        std::string s = "# schema=";
        s += kLogSchema;
        s += '\n';
        for (std::size_t i = 0; i < kLogColumns.size(); ++i)
        {
            if (i != 0)
            {
                s += ',';
            }
            s += kLogColumns[i];
        }
        s += '\n';
        return s;
    }

    // Per-session metadata line; carries the image size the jitter metric normalizes by.
    inline std::string session_line(std::string_view session_id, std::uint32_t width, std::uint32_t height)
    {
        std::ostringstream os;
        os << "# session=" << session_id << " w=" << width << " h=" << height << '\n';
        return os.str();
    }

    inline std::string format_row(const FrameRecord &r)
    {
        std::string out;
        out.reserve(128);
        auto opt = [&](const std::optional<double> &v) {
            out += ',';
            if (v)
            {
                detail::append_number(out, *v);
            }
        };
        out += r.session_id;
        out += ',';
        detail::append_number(out, r.frame_id);
        out += ',';
        detail::append_number(out, r.t_capture_us);
        out += ',';
        out += to_string(r.mode);
        out += ',';
        if (r.action)
        {
            out += to_string(*r.action);
        }
        opt(r.tip_x_px);
        opt(r.tip_y_px);
        opt(r.rel_depth);
        opt(r.pinch_px);
        out += ',';
        detail::append_number(out, r.proc_ms);
        opt(r.render_ms);
        out += '\n';
        return out;
    }

    struct SessionSummary
    {
        std::string session_id;
        std::size_t frame_count = 0;
        std::size_t action_count = 0;
        double wall_time_s = 0.0;
        std::array<std::size_t, 4> mode_counts{};

        std::size_t count(Mode m) const noexcept { return mode_counts[static_cast<std::size_t>(m)]; }
    };

    /// Appends one session to a tslog/1 CSV. Rows go through a bounded queue to a writer
    /// thread; when the queue is full log_frame() blocks instead of dropping rows. Write
    /// errors are held back and raised from close_session().
    class SessionLogger
    {
    public:
        SessionLogger(const std::filesystem::path &path, std::string session_id, std::uint32_t width,
                      std::uint32_t height, std::size_t queue_capacity = 4096)
            : queue_(queue_capacity)
        {
            summary_.session_id = std::move(session_id);
            if (!valid_session_id(summary_.session_id))
            {
                throw std::invalid_argument("invalid session_id '" + summary_.session_id + "'");
            }
            const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
            if (!fresh)
            {
                std::ifstream probe(path);
                std::string first;
                std::getline(probe, first);
                if (first != "# schema=" + std::string(kLogSchema))
                {
                    throw SchemaMismatch("", "existing log " + path.string() + " is not " + std::string(kLogSchema));
                }
            }
            out_.open(path, std::ios::binary | std::ios::app);
            if (!out_)
            {
                throw IoFailure("cannot open log " + path.string());
            }
            if (fresh)
            {
                out_ << log_preamble();
            }
            out_ << session_line(summary_.session_id, width, height);
            writer_ = std::thread([this] { drain(); });
        }

        SessionLogger(const SessionLogger &) = delete;
        SessionLogger &operator=(const SessionLogger &) = delete;

        ~SessionLogger()
        {
            if (writer_.joinable())
            {
                try
                {
                    close_session();
                }
                catch (...)
                {
                }
            }
        }

        const std::string &session_id() const noexcept { return summary_.session_id; }

        void log_frame(FrameRecord r)
        {
            if (r.session_id.empty())
            {
                r.session_id = summary_.session_id;
            }
            else if (r.session_id != summary_.session_id)
            {
                throw std::invalid_argument("row for session '" + r.session_id + "' logged to session '" +
                                            summary_.session_id + "'");
            }
            check_record(r);
            if (summary_.frame_count == 0)
            {
                first_t_ = r.t_capture_us;
            }
            last_t_ = r.t_capture_us;
            ++summary_.frame_count;
            ++summary_.mode_counts[static_cast<std::size_t>(r.mode)];
            if (r.action)
            {
                ++summary_.action_count;
            }
            queue_.push(format_row(r));
        }

        SessionSummary close_session()
        {
            if (!writer_.joinable())
            {
                throw std::logic_error("session already closed");
            }
            queue_.close();
            writer_.join();
            out_.flush();
            const bool ok = static_cast<bool>(out_) && !failed_;
            out_.close();
            if (!ok)
            {
                throw IoFailure("failed writing session " + summary_.session_id);
            }
            summary_.wall_time_s = summary_.frame_count == 0 ? 0.0 : static_cast<double>(last_t_ - first_t_) / 1e6;
            return summary_;
        }

    private:
        void drain()
        {
            while (auto row = queue_.pop())
            {
                if (!failed_)
                {
                    out_ << *row;
                    failed_ = !out_;
                }
            }
        }

        BoundedQueue<std::string> queue_;
        std::ofstream out_;
        std::thread writer_;
        bool failed_ = false;
        SessionSummary summary_;
        std::uint64_t first_t_ = 0;
        std::uint64_t last_t_ = 0;
    };

    struct SessionInfo
    {
        std::uint32_t width = 0;
        std::uint32_t height = 0;
    };

    /// Rows of one or more tslog/1 files in file order, plus per-session image sizes.
    struct LogData
    {
        std::vector<FrameRecord> rows;
        std::map<std::string, SessionInfo> sessions;

        void append(LogData other)
        {
            rows.insert(rows.end(), std::make_move_iterator(other.rows.begin()),
                        std::make_move_iterator(other.rows.end()));
            sessions.merge(other.sessions);
        }
    };

    namespace detail
    {
        inline std::vector<std::string_view> split_csv(std::string_view line)
        {
            std::vector<std::string_view> out;
            std::size_t start = 0;
            while (true)
            {
                auto pos = line.find(',', start);
                if (pos == std::string_view::npos)
                {
                    out.push_back(line.substr(start));
                    break;
                }
                out.push_back(line.substr(start, pos - start));
                start = pos + 1;
            }
            return out;
        }

        inline std::string where(std::size_t line, std::string_view column)
        {
            return "line " + std::to_string(line) + ", column '" + std::string(column) + "'";
        }

        template <typename T>
        T parse_number(std::string_view s, std::size_t line, std::string_view column)
        {
            T v{};
            auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
            {
                throw SchemaMismatch(std::string(column), where(line, column) + ": bad number '" + std::string(s) + "'");
            }
            return v;
        }

        inline std::optional<double> parse_optional(std::string_view s, std::size_t line, std::string_view column)
        {
            if (s.empty())
            {
                return std::nullopt;
            }
            return parse_number<double>(s, line, column);
        }

        inline void parse_session_line(std::string_view line, std::map<std::string, SessionInfo> &sessions)
        {
            std::istringstream is{std::string(line.substr(1))};
            std::string tok, id;
            SessionInfo info;
            while (is >> tok)
            {
                auto eq = tok.find('=');
                if (eq == std::string::npos)
                    continue;
                auto key = tok.substr(0, eq);
                auto val = tok.substr(eq + 1);
                if (key == "session")
                    id = val;
                else if (key == "w" || key == "h")
                {
                    std::uint32_t v = 0;
                    auto res = std::from_chars(val.data(), val.data() + val.size(), v);
                    if (val.empty() || res.ec != std::errc{} || res.ptr != val.data() + val.size())
                        throw SchemaMismatch("", "session line: bad " + key + " '" + val + "'");
                    (key == "w" ? info.width : info.height) = v;
                }
            }
            if (!id.empty())
            {
                sessions[id] = info;
            }
        }
    }

    inline LogData read_log(std::istream &in)
    {
        LogData data;
        std::string line;
        std::size_t line_no = 0;
        bool have_header = false;
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
                if (line.rfind("# session=", 0) == 0)
                {
                    detail::parse_session_line(line, data.sessions);
                }
                else if (line.rfind("# schema=", 0) == 0 && std::string_view(line).substr(9) != kLogSchema)
                {
                    throw SchemaMismatch("", "unsupported schema '" + line.substr(9) + "'");
                }
                continue;
            }
            auto fields = detail::split_csv(line);
            if (!have_header)
            {
                for (std::size_t i = 0; i < kLogColumns.size(); ++i)
                {
                    if (i >= fields.size() || fields[i] != kLogColumns[i])
                    {
                        throw SchemaMismatch(std::string(kLogColumns[i]),
                                             "header: expected column '" + std::string(kLogColumns[i]) + "' at position " +
                                                 std::to_string(i + 1));
                    }
                }
                if (fields.size() != kLogColumns.size())
                {
                    throw SchemaMismatch(std::string(fields[kLogColumns.size()]),
                                         "header: unexpected extra column '" + std::string(fields[kLogColumns.size()]) + "'");
                }
                have_header = true;
                continue;
            }
            if (line.rfind("session_id,", 0) == 0)
            {
                continue; // repeated header from a concatenated file
            }
            if (fields.size() != kLogColumns.size())
            {
                const auto col = fields.size() < kLogColumns.size() ? kLogColumns[fields.size()] : std::string_view("<extra>");
                throw SchemaMismatch(std::string(col), "line " + std::to_string(line_no) + ": expected " +
                                                           std::to_string(kLogColumns.size()) + " fields, got " +
                                                           std::to_string(fields.size()));
            }
            FrameRecord r;
            r.session_id = std::string(fields[0]);
            if (!valid_session_id(r.session_id))
            {
                throw SchemaMismatch("session_id", detail::where(line_no, "session_id") + ": invalid value");
            }
            r.frame_id = detail::parse_number<std::uint64_t>(fields[1], line_no, kLogColumns[1]);
            r.t_capture_us = detail::parse_number<std::uint64_t>(fields[2], line_no, kLogColumns[2]);
            auto mode = parse_mode(fields[3]);
            if (!mode)
            {
                throw SchemaMismatch("mode", detail::where(line_no, "mode") + ": unknown mode '" + std::string(fields[3]) + "'");
            }
            r.mode = *mode;
            if (!fields[4].empty())
            {
                auto action = parse_mode(fields[4]);
                if (!action || *action == Mode::none || r.mode == Mode::none)
                {
                    throw SchemaMismatch("action", detail::where(line_no, "action") + ": invalid action '" +
                                                       std::string(fields[4]) + "'");
                }
                r.action = action;
            }
            r.tip_x_px = detail::parse_optional(fields[5], line_no, kLogColumns[5]);
            r.tip_y_px = detail::parse_optional(fields[6], line_no, kLogColumns[6]);
            r.rel_depth = detail::parse_optional(fields[7], line_no, kLogColumns[7]);
            r.pinch_px = detail::parse_optional(fields[8], line_no, kLogColumns[8]);
            r.proc_ms = detail::parse_number<double>(fields[9], line_no, kLogColumns[9]);
            r.render_ms = detail::parse_optional(fields[10], line_no, kLogColumns[10]);
            if (r.proc_ms < 0.0 || (r.render_ms && *r.render_ms < 0.0))
            {
                throw SchemaMismatch(r.proc_ms < 0.0 ? "proc_ms" : "render_ms", "line " + std::to_string(line_no) + ": negative latency");
            }
            data.rows.push_back(std::move(r));
        }
        if (!have_header)
        {
            throw SchemaMismatch(std::string(kLogColumns[0]), "missing header row");
        }
        return data;
    }

    inline LogData read_log(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
        {
            throw IoFailure("cannot open log " + path.string());
        }
        return read_log(in);
    }
}
