#pragma once

#include "touchless/session_log.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace touchless
{
    class EmptyMode : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    class InsufficientData : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    class ZeroDuration : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    inline constexpr std::array<Mode, 3> kActiveModes = {Mode::shift, Mode::rotate, Mode::zoom};

    struct Interval
    {
        double lo = 0.0;
        double hi = 0.0;

        friend bool operator==(const Interval &, const Interval &) = default;
    };

    /// Reference intervals for smooth interaction. All intervals are closed.
    struct FluidBand
    {
        Interval switching_rate{2.0, 5.0};
        Interval cmd_gen_ratio{0.8, 1.0};
        Interval rms_jitter{0.005, 0.03};
        Interval proc_latency_ms{10.0, 50.0};
        double fps_min = 20.0;
        Interval render_latency_ms{10.0, 25.0};
    };

    /// Mean with population standard deviation over frames and over per-session means.
    struct Stat
    {
        std::size_t n = 0;
        std::optional<double> mean;
        std::optional<double> std_frame;
        std::optional<double> std_session;
    };

    struct ModeMetrics
    {
        std::size_t frames = 0;
        std::size_t actions = 0;
        std::optional<double> cmd_gen_ratio;
        std::optional<double> cmd_gen_ratio_std_session;
        std::size_t jitter_deltas = 0;
        std::optional<double> rms_jitter;
        std::optional<double> rms_jitter_std_session;
        Stat proc_ms;
        Stat render_ms;
        // 1000 / mean(proc_ms).
        std::optional<double> fps;
        // Mean and spread of per-session 1000 / mean(proc_ms).
        std::optional<double> fps_session_mean;
        std::optional<double> fps_std_session;
    };

    struct MetricsReport
    {
        std::size_t total_rows = 0;
        std::size_t sessions = 0;
        std::array<ModeMetrics, 3> modes;
        ModeMetrics global;
        std::size_t transitions = 0;
        double interaction_time_s = 0.0;
        std::optional<double> switching_rate;
        std::optional<double> switching_rate_std_session;
        // Set when proc_ms covers engine work only (replay without landmark inference).
        bool engine_only = false;

        const ModeMetrics &mode(Mode m) const { return modes.at(static_cast<std::size_t>(m) - 1); }
        ModeMetrics &mode(Mode m) { return modes.at(static_cast<std::size_t>(m) - 1); }
    };

    namespace detail
    {
        inline double mean_of(std::span<const double> v)
        {
            double s = 0.0;
            for (double x : v)
                s += x;
            return s / static_cast<double>(v.size());
        }

        inline double pop_std(std::span<const double> v)
        {
            const double m = mean_of(v);
            double s = 0.0;
            for (double x : v)
                s += (x - m) * (x - m);
            return std::sqrt(s / static_cast<double>(v.size()));
        }

        inline std::optional<double> std_or_none(const std::vector<double> &v)
        {
            if (v.empty())
                return std::nullopt;
            return pop_std(v);
        }

        inline double diagonal_of(const std::string &session, const std::map<std::string, SessionInfo> &sessions,
                                  SessionInfo fallback)
        {
            auto it = sessions.find(session);
            SessionInfo d = it != sessions.end() && it->second.width > 0 && it->second.height > 0 ? it->second : fallback;
            return std::hypot(static_cast<double>(d.width), static_cast<double>(d.height));
        }

        // Squared diagonal-normalized delta between two adjacent rows of mode m, if measurable.
        inline std::optional<double> normalized_sq_delta(const FrameRecord &prev, const FrameRecord &cur, Mode m,
                                                          double diag)
        {
            if (prev.session_id != cur.session_id || prev.mode != m || cur.mode != m)
                return std::nullopt;
            if (m == Mode::zoom)
            {
                if (!prev.pinch_px || !cur.pinch_px)
                    return std::nullopt;
                const double d = (*cur.pinch_px - *prev.pinch_px) / diag;
                return d * d;
            }
            if (!prev.tip_x_px || !prev.tip_y_px || !cur.tip_x_px || !cur.tip_y_px)
                return std::nullopt;
            const double dx = (*cur.tip_x_px - *prev.tip_x_px) / diag;
            const double dy = (*cur.tip_y_px - *prev.tip_y_px) / diag;
            return dx * dx + dy * dy;
        }

        inline std::vector<double> squared_deltas(std::span<const FrameRecord> rows, std::span<const Mode> modes,
                                                  const std::map<std::string, SessionInfo> &sessions,
                                                  SessionInfo fallback)
        {
            std::vector<double> out;
            // Each row pairs with the previous row of its own session.
            std::map<std::string_view, const FrameRecord *> prev;
            for (const auto &cur : rows)
            {
                const FrameRecord *&p = prev[cur.session_id];
                const FrameRecord *before = std::exchange(p, &cur);
                if (!before || std::find(modes.begin(), modes.end(), cur.mode) == modes.end())
                    continue;
                const double diag = diagonal_of(cur.session_id, sessions, fallback);
                if (auto d = normalized_sq_delta(*before, cur, cur.mode, diag))
                    out.push_back(*d);
            }
            return out;
        }
    }

    /// Fraction of rows carrying a non-empty action. Rows are expected pre-filtered to one mode.
    inline double cmd_gen_ratio(std::span<const FrameRecord> rows)
    {
        if (rows.empty())
        {
            throw EmptyMode("no frames for this mode");
        }
        std::size_t n = 0;
        for (const auto &r : rows)
        {
            n += r.has_action() ? 1 : 0;
        }
        return static_cast<double>(n) / static_cast<double>(rows.size());
    }

    /// RMS of frame-to-frame displacement divided by the image diagonal. Deltas are taken
    /// only between consecutive rows of one session that are both in `mode`; ZOOM uses
    /// the pinch distance, SHIFT/ROTATE the tracked fingertip. `rows` must be in frame order.
    inline double rms_jitter(std::span<const FrameRecord> rows, Mode mode,
                             const std::map<std::string, SessionInfo> &sessions = {},
                             SessionInfo fallback = {1280, 720})
    {
        const std::array<Mode, 1> modes{mode};
        auto sq = detail::squared_deltas(rows, modes, sessions, fallback);
        if (sq.empty())
        {
            throw InsufficientData(std::string("fewer than 2 consecutive ") + std::string(to_string(mode)) + " rows");
        }
        return std::sqrt(detail::mean_of(sq));
    }

    /// Single-resolution convenience overload.
    inline double rms_jitter(std::span<const FrameRecord> rows, Mode mode, std::uint32_t width, std::uint32_t height)
    {
        return rms_jitter(rows, mode, {}, SessionInfo{width, height});
    }

    struct LatencySummary
    {
        Stat proc_ms;
        Stat render_ms;
        std::optional<double> fps;
        std::optional<double> fps_session_mean;
        std::optional<double> fps_std_session;
    };

    inline std::optional<double> fps_from_latency(double mean_ms)
    {
        if (!(mean_ms > 0.0))
            return std::nullopt;
        return 1000.0 / mean_ms;
    }

    /// Latency statistics; render_ms is summarised over rows where it is present.
    inline LatencySummary latency_and_fps(std::span<const FrameRecord> rows)
    {
        if (rows.empty())
        {
            throw EmptyMode("no rows");
        }
        LatencySummary out;
        std::vector<double> proc, render;
        std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> per_session;
        for (const auto &r : rows)
        {
            proc.push_back(r.proc_ms);
            auto &s = per_session[r.session_id];
            s.first.push_back(r.proc_ms);
            if (r.render_ms)
            {
                render.push_back(*r.render_ms);
                s.second.push_back(*r.render_ms);
            }
        }
        std::vector<double> proc_means, render_means, fps_sessions;
        for (const auto &[id, v] : per_session)
        {
            const double pm = detail::mean_of(v.first);
            proc_means.push_back(pm);
            if (auto f = fps_from_latency(pm))
                fps_sessions.push_back(*f);
            if (!v.second.empty())
                render_means.push_back(detail::mean_of(v.second));
        }
        out.proc_ms = {proc.size(), detail::mean_of(proc), detail::pop_std(proc), detail::pop_std(proc_means)};
        out.render_ms.n = render.size();
        if (!render.empty())
        {
            out.render_ms.mean = detail::mean_of(render);
            out.render_ms.std_frame = detail::pop_std(render);
            out.render_ms.std_session = detail::pop_std(render_means);
        }
        out.fps = fps_from_latency(*out.proc_ms.mean);
        if (!fps_sessions.empty())
        {
            out.fps_session_mean = detail::mean_of(fps_sessions);
            out.fps_std_session = detail::pop_std(fps_sessions);
        }
        return out;
    }

    struct SwitchingSummary
    {
        std::size_t transitions = 0;
        double interaction_time_s = 0.0;
        double rate = 0.0;
        std::optional<double> std_session;
    };

    /// Mode transitions (NONE included) per second of interaction time, where interaction time
    /// sums each session's first-to-last capture span. Rows must be in frame order per session.
    inline SwitchingSummary switching_rate(std::span<const FrameRecord> rows)
    {
        struct Span
        {
            std::uint64_t first = 0;
            std::uint64_t last = 0;
            std::size_t frames = 0;
            std::size_t transitions = 0;
            Mode last_mode = Mode::none;
        };
        std::map<std::string, Span> spans;
        for (const auto &r : rows)
        {
            auto [it, inserted] = spans.try_emplace(r.session_id);
            Span &s = it->second;
            if (inserted)
            {
                s.first = r.t_capture_us;
            }
            else if (r.mode != s.last_mode)
            {
                ++s.transitions;
            }
            s.last = r.t_capture_us;
            s.last_mode = r.mode;
            ++s.frames;
        }
        SwitchingSummary out;
        std::uint64_t total_us = 0;
        std::vector<double> per_session;
        for (const auto &[id, s] : spans)
        {
            if (s.last <= s.first)
            {
                throw ZeroDuration("session '" + id + "' spans zero time (" + std::to_string(s.frames) + " frame(s))");
            }
            total_us += s.last - s.first;
            out.transitions += s.transitions;
            per_session.push_back(static_cast<double>(s.transitions) / (static_cast<double>(s.last - s.first) / 1e6));
        }
        if (total_us == 0)
        {
            throw ZeroDuration("no interaction time");
        }
        out.interaction_time_s = static_cast<double>(total_us) / 1e6;
        out.rate = static_cast<double>(out.transitions) / out.interaction_time_s;
        out.std_session = detail::std_or_none(per_session);
        return out;
    }

    namespace detail
    {
        inline ModeMetrics mode_metrics(std::span<const FrameRecord> all_rows, std::span<const Mode> modes,
                                        const std::map<std::string, SessionInfo> &sessions, SessionInfo fallback)
        {
            ModeMetrics mm;
            std::vector<FrameRecord> rows;
            for (const auto &r : all_rows)
            {
                if (std::find(modes.begin(), modes.end(), r.mode) != modes.end())
                    rows.push_back(r);
            }
            mm.frames = rows.size();
            if (rows.empty())
                return mm;
            for (const auto &r : rows)
                mm.actions += r.has_action() ? 1 : 0;
            mm.cmd_gen_ratio = cmd_gen_ratio(rows);

            auto sq = squared_deltas(all_rows, modes, sessions, fallback);
            mm.jitter_deltas = sq.size();
            if (!sq.empty())
                mm.rms_jitter = std::sqrt(mean_of(sq));

            // Per-session spreads.
            std::map<std::string, std::vector<FrameRecord>> by_session;
            for (const auto &r : all_rows)
                by_session[r.session_id].push_back(r);
            std::vector<double> ratios, jitters;
            for (const auto &[id, srows] : by_session)
            {
                std::size_t n = 0, a = 0;
                for (const auto &r : srows)
                {
                    if (std::find(modes.begin(), modes.end(), r.mode) != modes.end())
                    {
                        ++n;
                        a += r.has_action() ? 1 : 0;
                    }
                }
                if (n > 0)
                    ratios.push_back(static_cast<double>(a) / static_cast<double>(n));
                auto ssq = squared_deltas(srows, modes, sessions, fallback);
                if (!ssq.empty())
                    jitters.push_back(std::sqrt(mean_of(ssq)));
            }
            mm.cmd_gen_ratio_std_session = std_or_none(ratios);
            mm.rms_jitter_std_session = std_or_none(jitters);

            auto lat = latency_and_fps(rows);
            mm.proc_ms = lat.proc_ms;
            mm.render_ms = lat.render_ms;
            mm.fps = lat.fps;
            mm.fps_session_mean = lat.fps_session_mean;
            mm.fps_std_session = lat.fps_std_session;
            return mm;
        }
    }

    /// Full report over pooled rows. Sessions are identified by session_id; pooling several
    /// logs is plain concatenation of their rows.
    inline MetricsReport compute_metrics(const LogData &data, SessionInfo fallback = {1280, 720})
    {
        MetricsReport rep;
        rep.total_rows = data.rows.size();
        std::map<std::string, int> ids;
        for (const auto &r : data.rows)
            ids[r.session_id] = 0;
        rep.sessions = ids.size();
        for (Mode m : kActiveModes)
        {
            const std::array<Mode, 1> one{m};
            rep.mode(m) = detail::mode_metrics(data.rows, one, data.sessions, fallback);
        }
        rep.global = detail::mode_metrics(data.rows, kActiveModes, data.sessions, fallback);
        if (!data.rows.empty())
        {
            try
            {
                auto sw = switching_rate(data.rows);
                rep.transitions = sw.transitions;
                rep.interaction_time_s = sw.interaction_time_s;
                rep.switching_rate = sw.rate;
                rep.switching_rate_std_session = sw.std_session;
            }
            catch (const ZeroDuration &)
            {
                // left absent
            }
        }
        return rep;
    }

    enum class Verdict : std::uint8_t
    {
        absent,
        below,
        in_band,
        above,
    };

    inline constexpr std::string_view to_string(Verdict v) noexcept
    {
        switch (v)
        {
        case Verdict::below:
            return "below";
        case Verdict::in_band:
            return "in-band";
        case Verdict::above:
            return "above";
        case Verdict::absent:
            break;
        }
        return "absent";
    }

    inline Verdict classify_value(std::optional<double> v, Interval band) noexcept
    {
        if (!v)
            return Verdict::absent;
        if (*v < band.lo)
            return Verdict::below;
        if (*v > band.hi)
            return Verdict::above;
        return Verdict::in_band;
    }

    inline Verdict classify_fps(std::optional<double> v, double fps_min) noexcept
    {
        if (!v)
            return Verdict::absent;
        return *v < fps_min ? Verdict::below : Verdict::in_band;
    }

    struct ScopeVerdicts
    {
        Verdict cmd_gen_ratio = Verdict::absent;
        Verdict rms_jitter = Verdict::absent;
        Verdict proc_latency = Verdict::absent;
        Verdict render_latency = Verdict::absent;
        Verdict fps = Verdict::absent;
        Verdict switching_rate = Verdict::absent;

        bool out_of_band() const noexcept
        {
            for (Verdict v : {cmd_gen_ratio, rms_jitter, proc_latency, render_latency, fps, switching_rate})
            {
                if (v == Verdict::below || v == Verdict::above)
                    return true;
            }
            return false;
        }
    };

    struct Classification
    {
        std::array<ScopeVerdicts, 3> modes;
        ScopeVerdicts global;

        const ScopeVerdicts &mode(Mode m) const { return modes.at(static_cast<std::size_t>(m) - 1); }

        bool out_of_band() const noexcept
        {
            return global.out_of_band() || std::any_of(modes.begin(), modes.end(), [](const auto &s) { return s.out_of_band(); });
        }
    };

    inline ScopeVerdicts classify(const ModeMetrics &m, const FluidBand &band)
    {
        ScopeVerdicts v;
        v.cmd_gen_ratio = classify_value(m.cmd_gen_ratio, band.cmd_gen_ratio);
        v.rms_jitter = classify_value(m.rms_jitter, band.rms_jitter);
        v.proc_latency = classify_value(m.proc_ms.mean, band.proc_latency_ms);
        v.render_latency = classify_value(m.render_ms.mean, band.render_latency_ms);
        v.fps = classify_fps(m.fps, band.fps_min);
        return v;
    }

    inline Classification classify(const MetricsReport &rep, const FluidBand &band = {})
    {
        Classification c;
        for (Mode m : kActiveModes)
            c.modes[static_cast<std::size_t>(m) - 1] = classify(rep.mode(m), band);
        c.global = classify(rep.global, band);
        c.global.switching_rate = classify_value(rep.switching_rate, band.switching_rate);
        return c;
    }

    /// Applies "name=lo:hi" (or "fps_min=v") to a band. Names match the FluidBand fields.
    inline void apply_band_override(FluidBand &band, std::string_view spec)
    {
        auto eq = spec.find('=');
        if (eq == std::string_view::npos)
        {
            throw std::invalid_argument("band override must be name=lo:hi");
        }
        const std::string name(spec.substr(0, eq));
        const std::string value(spec.substr(eq + 1));
        auto parse = [&](const std::string &s) {
            std::size_t used = 0;
            double v = std::stod(s, &used);
            if (used != s.size())
                throw std::invalid_argument("bad number in band override '" + std::string(spec) + "'");
            return v;
        };
        if (name == "fps_min")
        {
            band.fps_min = parse(value);
            return;
        }
        auto colon = value.find(':');
        if (colon == std::string::npos)
        {
            throw std::invalid_argument("band override must be name=lo:hi");
        }
        Interval iv{parse(value.substr(0, colon)), parse(value.substr(colon + 1))};
        if (iv.lo > iv.hi)
        {
            throw std::invalid_argument("band lower bound exceeds upper bound in '" + std::string(spec) + "'");
        }
        if (name == "switching_rate")
            band.switching_rate = iv;
        else if (name == "cmd_gen_ratio")
            band.cmd_gen_ratio = iv;
        else if (name == "rms_jitter")
            band.rms_jitter = iv;
        else if (name == "proc_latency_ms")
            band.proc_latency_ms = iv;
        else if (name == "render_latency_ms")
            band.render_latency_ms = iv;
        else
            throw std::invalid_argument("unknown band metric '" + name + "'");
    }
}
