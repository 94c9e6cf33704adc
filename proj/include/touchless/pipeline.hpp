#pragma once

#include "touchless/gesture.hpp"
#include "touchless/metrics.hpp"
#include "touchless/protocol.hpp"
#include "touchless/session_log.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <thread>
#include <vector>

namespace touchless
{
    struct ProcessedFrame
    {
        FrameRecord record;
        Mode previous_mode = Mode::none;
        std::optional<SequencedCommand> command;
    };

    /// Engine plus the bookkeeping that turns a step into a log row and a numbered command.
    class FrameProcessor
    {
    public:
        FrameProcessor(const ModeConfig &cfg, std::string session_id) : engine_(cfg), session_id_(std::move(session_id)) {}

        ProcessedFrame process(const LandmarkFrame &frame)
        {
            ProcessedFrame out;
            out.previous_mode = engine_.state().mode;
            const StepResult r = engine_.process(frame);
            FrameRecord &rec = out.record;
            rec.session_id = session_id_;
            rec.frame_id = frame.frame_id;
            rec.t_capture_us = frame.t_capture_us;
            rec.mode = r.state.mode;
            if (r.observation.tip)
            {
                rec.tip_x_px = r.observation.tip->x;
                rec.tip_y_px = r.observation.tip->y;
            }
            rec.rel_depth = r.observation.rel_depth;
            rec.pinch_px = r.observation.pinch_px;
            if (!r.command.empty())
            {
                rec.action = r.command.kind;
                out.command = SequencedCommand{++seq_, r.command};
            }
            return out;
        }

        const GestureEngine &engine() const noexcept { return engine_; }
        const std::string &session_id() const noexcept { return session_id_; }

    private:
        GestureEngine engine_;
        std::string session_id_;
        std::uint64_t seq_ = 0;
    };

    struct ReplayOptions
    {
        ModeConfig config;
        std::string session_id = "replay";
        // Pace frames by their capture timestamps instead of running flat out.
        bool realtime = false;
        std::optional<std::filesystem::path> log_path;
        std::optional<std::filesystem::path> commands_path;
    };

    struct ReplayResult
    {
        std::vector<FrameRecord> records;
        std::vector<SequencedCommand> commands;
        MetricsReport report;
        // Total engine time in milliseconds over all frames.
        double engine_ms = 0.0;
    };

    /// Runs frames through the engine on the trace's own clock. proc_ms is the measured
    /// engine cost per frame, so the report is marked engine-only.
    inline ReplayResult replay(const std::vector<LandmarkFrame> &frames, const ReplayOptions &opt)
    {
        using clock = std::chrono::steady_clock;
        ReplayResult out;
        FrameProcessor proc(opt.config, opt.session_id);
        std::optional<SessionLogger> logger;
        if (opt.log_path && !frames.empty())
        {
            logger.emplace(*opt.log_path, opt.session_id, frames.front().width, frames.front().height);
        }
        std::ofstream commands;
        if (opt.commands_path)
        {
            commands.open(*opt.commands_path, std::ios::binary | std::ios::trunc);
            if (!commands)
                throw IoFailure("cannot open " + opt.commands_path->string());
        }
        out.records.reserve(frames.size());
        const auto wall_start = clock::now();
        for (const auto &frame : frames)
        {
            validate(frame);
            if (opt.realtime)
            {
                const auto due = wall_start + std::chrono::microseconds(frame.t_capture_us - frames.front().t_capture_us);
                std::this_thread::sleep_until(due);
            }
            const auto t0 = clock::now();
            ProcessedFrame pf = proc.process(frame);
            const auto t1 = clock::now();
            pf.record.proc_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            out.engine_ms += pf.record.proc_ms;
            if (pf.command)
            {
                if (commands.is_open())
                    commands << encode_command(*pf.command) << '\n';
                out.commands.push_back(*pf.command);
            }
            if (logger)
                logger->log_frame(pf.record);
            out.records.push_back(std::move(pf.record));
        }
        if (logger)
            logger->close_session();
        if (commands.is_open())
        {
            commands.flush();
            if (!commands)
                throw IoFailure("write failed for " + opt.commands_path->string());
        }
        LogData data;
        data.rows = out.records;
        if (!frames.empty())
            data.sessions[opt.session_id] = {frames.front().width, frames.front().height};
        out.report = compute_metrics(data);
        out.report.engine_only = true;
        return out;
    }
}
