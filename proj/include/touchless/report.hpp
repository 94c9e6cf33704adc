#pragma once

#include "touchless/metrics.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <string>

namespace touchless
{
    namespace detail
    {
        inline std::string fixed(std::optional<double> v, int prec)
        {
            return v ? fmt::format("{:.{}f}", *v, prec) : std::string("-");
        }

        inline std::string pm(std::optional<double> mean, std::optional<double> sd, int prec)
        {
            if (!mean)
                return "-";
            return sd ? fmt::format("{:.{}f} ± {:.{}f}", *mean, prec, *sd, prec) : fixed(mean, prec);
        }

        inline std::string percent(std::optional<double> v)
        {
            return v ? fmt::format("{:.2f}%", *v * 100.0) : std::string("-");
        }

        inline std::string kv_number(std::optional<double> v)
        {
            if (!v)
                return "";
            // Round-trip precision for machine consumers.
            return fmt::format("{}", *v);
        }
    }

    /// Human-readable table. Spreads shown are across sessions; per-frame spreads are in the key-value output.
    inline std::string format_table(const MetricsReport &rep, const Classification &cls)
    {
        std::string out;
        out += fmt::format("rows: {}  sessions: {}  interaction time: {:.3f} s{}\n", rep.total_rows, rep.sessions,
                           rep.interaction_time_s, rep.engine_only ? "  [latencies engine-only]" : "");
        out += fmt::format("{:<8} {:>7} {:>16} {:>18} {:>20} {:>20} {:>16} {:>16}\n", "mode", "N", "CMD-Gen ratio",
                           "RMS jitter", "Proc latency (ms)", "Render latency (ms)", "FPS", "Switching /s");
        auto line = [&](std::string_view name, const ModeMetrics &m, const ScopeVerdicts &v, bool global) {
            std::string jitter = m.rms_jitter ? detail::percent(m.rms_jitter) + (m.rms_jitter_std_session ? " ± " + detail::percent(m.rms_jitter_std_session) : "")
                                              : "-";
            out += fmt::format("{:<8} {:>7} {:>16} {:>18} {:>20} {:>20} {:>16} {:>16}\n", name, m.frames,
                               detail::pm(m.cmd_gen_ratio, m.cmd_gen_ratio_std_session, 2), jitter,
                               detail::pm(m.proc_ms.mean, m.proc_ms.std_session, 2),
                               detail::pm(m.render_ms.mean, m.render_ms.std_session, 2),
                               detail::pm(m.fps, m.fps_std_session, 2),
                               global ? detail::pm(rep.switching_rate, rep.switching_rate_std_session, 2) : "");
            out += fmt::format("{:<8} {:>7} {:>16} {:>18} {:>20} {:>20} {:>16} {:>16}\n", "", "", to_string(v.cmd_gen_ratio),
                               to_string(v.rms_jitter), to_string(v.proc_latency), to_string(v.render_latency),
                               to_string(v.fps), global ? to_string(v.switching_rate) : "");
        };
        for (Mode m : kActiveModes)
            line(to_string(m), rep.mode(m), cls.mode(m), false);
        line("GLOBAL", rep.global, cls.global, true);
        if (rep.global.fps_session_mean)
        {
            out += fmt::format("fps from mean latency: {}   mean of per-session fps: {}\n", detail::fixed(rep.global.fps, 2),
                               detail::fixed(rep.global.fps_session_mean, 2));
        }
        out += fmt::format("verdict: {}\n", cls.out_of_band() ? "OUT OF BAND" : "all present metrics in band");
        return out;
    }

    /// Flat key=value lines, one metric per line, stable key order.
    inline std::string format_kv(const MetricsReport &rep, const Classification &cls)
    {
        std::string out;
        auto put = [&](const std::string &key, const std::string &value) { out += key + "=" + value + "\n"; };
        put("rows", std::to_string(rep.total_rows));
        put("sessions", std::to_string(rep.sessions));
        put("engine_only", rep.engine_only ? "true" : "false");
        auto scope = [&](const std::string &p, const ModeMetrics &m, const ScopeVerdicts &v) {
            put(p + ".frames", std::to_string(m.frames));
            put(p + ".actions", std::to_string(m.actions));
            put(p + ".cmd_gen_ratio", detail::kv_number(m.cmd_gen_ratio));
            put(p + ".cmd_gen_ratio.std_session", detail::kv_number(m.cmd_gen_ratio_std_session));
            put(p + ".rms_jitter", detail::kv_number(m.rms_jitter));
            put(p + ".rms_jitter.deltas", std::to_string(m.jitter_deltas));
            put(p + ".rms_jitter.std_session", detail::kv_number(m.rms_jitter_std_session));
            put(p + ".proc_ms.mean", detail::kv_number(m.proc_ms.mean));
            put(p + ".proc_ms.std_frame", detail::kv_number(m.proc_ms.std_frame));
            put(p + ".proc_ms.std_session", detail::kv_number(m.proc_ms.std_session));
            put(p + ".render_ms.n", std::to_string(m.render_ms.n));
            put(p + ".render_ms.mean", detail::kv_number(m.render_ms.mean));
            put(p + ".render_ms.std_frame", detail::kv_number(m.render_ms.std_frame));
            put(p + ".render_ms.std_session", detail::kv_number(m.render_ms.std_session));
            put(p + ".fps", detail::kv_number(m.fps));
            put(p + ".fps.session_mean", detail::kv_number(m.fps_session_mean));
            put(p + ".fps.std_session", detail::kv_number(m.fps_std_session));
            put(p + ".verdict.cmd_gen_ratio", std::string(to_string(v.cmd_gen_ratio)));
            put(p + ".verdict.rms_jitter", std::string(to_string(v.rms_jitter)));
            put(p + ".verdict.proc_latency", std::string(to_string(v.proc_latency)));
            put(p + ".verdict.render_latency", std::string(to_string(v.render_latency)));
            put(p + ".verdict.fps", std::string(to_string(v.fps)));
        };
        for (Mode m : kActiveModes)
            scope(std::string(to_string(m)), rep.mode(m), cls.mode(m));
        scope("GLOBAL", rep.global, cls.global);
        put("GLOBAL.transitions", std::to_string(rep.transitions));
        put("GLOBAL.interaction_time_s", detail::kv_number(rep.interaction_time_s));
        put("GLOBAL.switching_rate", detail::kv_number(rep.switching_rate));
        put("GLOBAL.switching_rate.std_session", detail::kv_number(rep.switching_rate_std_session));
        put("GLOBAL.verdict.switching_rate", std::string(to_string(cls.global.switching_rate)));
        put("out_of_band", cls.out_of_band() ? "true" : "false");
        return out;
    }

    /// Radar chart of the global metrics: mean polygon, mean ± session spread ring, and the
    /// fluid band. Each axis is scaled so its band upper bound sits at 2/3 of the radius.
    inline std::string format_radar_svg(const MetricsReport &rep, const FluidBand &band = {})
    {
        struct Axis
        {
            std::string label;
            std::optional<double> value;
            std::optional<double> spread;
            double lo;
            double hi;
        };
        const auto &g = rep.global;
        const std::array<Axis, 6> axes{{
            {"CMD-Gen ratio", g.cmd_gen_ratio, g.cmd_gen_ratio_std_session, band.cmd_gen_ratio.lo, band.cmd_gen_ratio.hi},
            {"RMS jitter", g.rms_jitter, g.rms_jitter_std_session, band.rms_jitter.lo, band.rms_jitter.hi},
            {"Proc latency", g.proc_ms.mean, g.proc_ms.std_session, band.proc_latency_ms.lo, band.proc_latency_ms.hi},
            {"Render latency", g.render_ms.mean, g.render_ms.std_session, band.render_latency_ms.lo, band.render_latency_ms.hi},
            {"FPS", g.fps, g.fps_std_session, band.fps_min, band.fps_min * 2.0},
            {"Switching rate", rep.switching_rate, rep.switching_rate_std_session, band.switching_rate.lo, band.switching_rate.hi},
        }};
        const double cx = 300, cy = 300, radius = 220;
        auto point = [&](std::size_t i, double frac) {
            const double a = -std::numbers::pi / 2 + 2 * std::numbers::pi * static_cast<double>(i) / axes.size();
            frac = std::clamp(frac, 0.0, 1.0);
            return std::pair{cx + radius * frac * std::cos(a), cy + radius * frac * std::sin(a)};
        };
        auto norm = [&](const Axis &ax, double v) { return v / (ax.hi * 1.5); };
        auto polygon = [&](auto frac_of, const char *style) {
            std::string pts;
            for (std::size_t i = 0; i < axes.size(); ++i)
            {
                auto [x, y] = point(i, frac_of(axes[i]));
                pts += fmt::format("{:.2f},{:.2f} ", x, y);
            }
            return fmt::format("  <polygon points=\"{}\" {}/>\n", pts, style);
        };
        std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"0 0 600 600\">\n";
        svg += "  <rect width=\"600\" height=\"600\" fill=\"white\"/>\n";
        for (std::size_t i = 0; i < axes.size(); ++i)
        {
            auto [x, y] = point(i, 1.0);
            svg += fmt::format("  <line x1=\"{}\" y1=\"{}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#999\"/>\n", cx, cy, x, y);
            auto [lx, ly] = point(i, 1.0);
            svg += fmt::format("  <text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n", lx,
                               ly + (ly < cy ? -8 : 16), axes[i].label);
        }
        svg += polygon([&](const Axis &a) { return norm(a, a.hi); }, "fill=\"#8fd18f\" fill-opacity=\"0.25\" stroke=\"#2a8a2a\" stroke-dasharray=\"4 3\"");
        svg += polygon([&](const Axis &a) { return norm(a, a.lo); }, "fill=\"white\" fill-opacity=\"0.6\" stroke=\"#2a8a2a\" stroke-dasharray=\"4 3\"");
        svg += polygon([&](const Axis &a) { return a.value ? norm(a, *a.value + a.spread.value_or(0.0)) : 0.0; },
                       "fill=\"none\" stroke=\"#3060c0\" stroke-opacity=\"0.5\"");
        svg += polygon([&](const Axis &a) { return a.value ? norm(a, *a.value - a.spread.value_or(0.0)) : 0.0; },
                       "fill=\"none\" stroke=\"#3060c0\" stroke-opacity=\"0.5\"");
        svg += polygon([&](const Axis &a) { return a.value ? norm(a, *a.value) : 0.0; },
                       "fill=\"#3060c0\" fill-opacity=\"0.2\" stroke=\"#3060c0\" stroke-width=\"2\"");
        svg += "</svg>\n";
        return svg;
    }
}
