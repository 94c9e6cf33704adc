// touchless: command-line front end for the gesture engine.
//
// Exit codes:
//   0  success
//   1  analyze: at least one metric outside the fluid band
//   2  usage error
//   3  I/O failure
//   4  malformed trace
//   5  log schema mismatch
//   6  invalid configuration
//   7  invalid synth script
//   8  network error (bind/connect)
//   9  not enough data for the requested metric
//  10  internal error

#include "touchless/metrics.hpp"
#include "touchless/pipeline.hpp"
#include "touchless/report.hpp"
#include "touchless/server.hpp"
#include "touchless/synth.hpp"
#include "touchless/trace.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <httplib.h>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

namespace
{
    enum ExitCode : int
    {
        kOk = 0,
        kOutOfBand = 1,
        kUsage = 2,
        kIo = 3,
        kMalformedTrace = 4,
        kSchemaMismatch = 5,
        kConfigInvalid = 6,
        kSpecInvalid = 7,
        kNetwork = 8,
        kInsufficientData = 9,
        kInternal = 10,
    };

    std::atomic<bool> g_interrupted{false};

    extern "C" void on_signal(int) { g_interrupted = true; }

    void add_mode_options(CLI::App &app, touchless::ModeConfig &cfg)
    {
        auto *g = "Gesture engine";
        app.add_option("--sensitivity", cfg.sensitivity, "Global sensitivity: divides thresholds, multiplies gains")
            ->envname("TS_SENSITIVITY")
            ->group(g);
        app.add_option("--depth-threshold", cfg.depth_threshold, "Minimum relative depth of the dominant fingertip")
            ->envname("TS_DEPTH_THRESHOLD")
            ->group(g);
        app.add_option("--depth-delta-margin", cfg.depth_delta_margin, "Required depth lead over the other finger")
            ->envname("TS_DEPTH_DELTA_MARGIN")
            ->group(g);
        app.add_option("--extension-ratio", cfg.extension_ratio, "Tip/pip wrist-distance ratio for an extended finger")
            ->envname("TS_EXTENSION_RATIO")
            ->group(g);
        app.add_option("--pinch-engage", cfg.pinch_engage, "Pinch distance (fraction of diagonal) that engages ZOOM")
            ->envname("TS_PINCH_ENGAGE")
            ->group(g);
        app.add_option("--dead-zone", cfg.dead_zone, "Minimum normalized displacement that issues a command")
            ->envname("TS_DEAD_ZONE")
            ->group(g);
        app.add_option("--shift-gain", cfg.shift_gain)->envname("TS_SHIFT_GAIN")->group(g);
        app.add_option("--rotate-gain", cfg.rotate_gain)->envname("TS_ROTATE_GAIN")->group(g);
        app.add_option("--zoom-gain", cfg.zoom_gain)->envname("TS_ZOOM_GAIN")->group(g);
        app.add_option("--hysteresis-frames", cfg.hysteresis_frames, "Consecutive frames needed to commit a mode switch")
            ->envname("TS_HYSTERESIS_FRAMES")
            ->group(g);
        app.add_flag("--invert-depth", cfg.invert_depth, "Tracker reports larger z for nearer points")
            ->envname("TS_INVERT_DEPTH")
            ->group(g);
    }

    void print_report(const touchless::MetricsReport &rep, const touchless::FluidBand &band, const std::string &format,
                      const std::string &radar)
    {
        const auto cls = touchless::classify(rep, band);
        std::cout << (format == "kv" ? touchless::format_kv(rep, cls) : touchless::format_table(rep, cls));
        if (!radar.empty())
        {
            std::ofstream out(radar, std::ios::binary | std::ios::trunc);
            out << touchless::format_radar_svg(rep, band);
            if (!out)
                throw touchless::IoFailure("cannot write " + radar);
        }
    }

    void print_serve_summary(const touchless::ServeSummary &s)
    {
        std::cerr << fmt::format("session {}: {} rows, {:.3f} s, SHIFT {} ROTATE {} ZOOM {} NONE {}\n", s.session.session_id,
                                 s.session.frame_count, s.session.wall_time_s, s.session.count(touchless::Mode::shift),
                                 s.session.count(touchless::Mode::rotate), s.session.count(touchless::Mode::zoom),
                                 s.session.count(touchless::Mode::none));
        std::cerr << fmt::format("frames accepted {}  malformed {}  schema violations {}  out of order {}\n",
                                 s.frames_accepted, s.malformed_messages, s.schema_violations, s.out_of_order);
        std::cerr << fmt::format("bridge connections {}  disconnects {}  viewers {}  commands {}  broadcast drops {}  "
                                 "acks {}  render timeouts {}  clock-skew clamps {}\n",
                                 s.bridge_connections, s.bridge_disconnects, s.viewers_connected, s.commands_sent,
                                 s.broadcast_drops, s.acks, s.render_timeouts, s.clock_skew_clamped);
    }

    int run_server(touchless::ServeOptions opt, const std::string &static_dir, const std::string &http)
    {
        touchless::Server server(std::move(opt));
        std::unique_ptr<httplib::Server> web;
        std::thread web_thread;
        if (!static_dir.empty())
        {
            web = std::make_unique<httplib::Server>();
            if (!web->set_mount_point("/", static_dir))
                throw touchless::IoFailure("static directory not found: " + static_dir);
            auto ep = touchless::net::parse_endpoint(http);
            if (!web->bind_to_port(ep.host, ep.port))
                throw touchless::net::NetError("cannot bind static server to " + http);
            web_thread = std::thread([&] { web->listen_after_bind(); });
        }
        std::cerr << "bridge on port " << server.bridge_port();
        if (server.viewer_port() != 0)
            std::cerr << ", viewers on port " << server.viewer_port();
        std::cerr << std::endl;
        server.start();
        while (!g_interrupted && !server.stopping())
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        server.stop();
        auto summary = server.wait();
        if (web)
        {
            web->stop();
            web_thread.join();
        }
        print_serve_summary(summary);
        return kOk;
    }
}

int main(int argc, char **argv)
{
    using namespace touchless;

    CLI::App app{"Touchless gesture navigation engine"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Key-value config file (INI/TOML) for any long option");

    ModeConfig cfg;
    add_mode_options(app, cfg);

    // serve
    auto *serve = app.add_subcommand("serve", "Run live: bridge frames in, commands out to viewers");
    std::string bridge_ep = "127.0.0.1:7465", viewer_ep = "127.0.0.1:7466", log_path = "session.csv",
                session_id = "live", record_path, static_dir, http_ep = "127.0.0.1:8080";
    bool exit_on_disconnect = false;
    std::size_t mailbox = 64;
    int render_timeout_ms = 500;
    serve->add_option("--bridge", bridge_ep, "Listen address for the capture bridge")->envname("TS_BRIDGE");
    serve->add_option("--viewer", viewer_ep, "Listen address for viewer subscribers")->envname("TS_VIEWER");
    serve->add_option("--log", log_path, "Session CSV (appended)")->envname("TS_LOG");
    serve->add_option("--session-id", session_id)->envname("TS_SESSION_ID");
    serve->add_option("--record", record_path, "Also write accepted frames to this trace file");
    serve->add_option("--static-dir", static_dir, "Serve a viewer asset bundle over HTTP");
    serve->add_option("--http", http_ep, "HTTP listen address for --static-dir")->envname("TS_HTTP");
    serve->add_option("--viewer-mailbox", mailbox, "Per-viewer queue length before oldest messages drop");
    serve->add_option("--render-timeout-ms", render_timeout_ms, "Wait for presentation acks before logging a row");
    serve->add_flag("--exit-on-disconnect", exit_on_disconnect, "Stop when the bridge disconnects");

    // record
    auto *record = app.add_subcommand("record", "Record bridge frames to a trace file without running the engine");
    std::string record_out;
    record->add_option("--bridge", bridge_ep, "Listen address for the capture bridge")->envname("TS_BRIDGE");
    record->add_option("-o,--output", record_out, "Trace file to write")->required();
    record->add_flag("--exit-on-disconnect", exit_on_disconnect, "Stop when the bridge disconnects");

    // replay
    auto *replay_cmd = app.add_subcommand("replay", "Run a recorded trace through the engine");
    std::string trace_path, replay_log, commands_path, format = "table", radar;
    std::string replay_session = "replay";
    bool realtime = false;
    replay_cmd->add_option("trace", trace_path, "ts-trace/1 file")->required();
    replay_cmd->add_option("--log", replay_log, "Write the session CSV here (appended)");
    replay_cmd->add_option("--commands", commands_path, "Write the command stream (NDJSON) here");
    replay_cmd->add_option("--session-id", replay_session);
    replay_cmd->add_flag("--realtime", realtime, "Pace frames by their capture timestamps");
    replay_cmd->add_option("--format", format, "Report format")->check(CLI::IsMember({"table", "kv"}));
    replay_cmd->add_option("--radar", radar, "Write an SVG radar chart of the global metrics");

    // analyze
    auto *analyze = app.add_subcommand("analyze", "Compute metrics and fluid-band verdicts from session CSVs");
    std::vector<std::string> logs, band_overrides;
    std::uint32_t default_w = 1280, default_h = 720;
    analyze->add_option("logs", logs, "tslog/1 CSV files (pooled)")->required();
    analyze->add_option("--band", band_overrides, "Override a band interval: name=lo:hi or fps_min=v");
    analyze->add_option("--format", format, "Report format")->check(CLI::IsMember({"table", "kv"}));
    analyze->add_option("--radar", radar, "Write an SVG radar chart of the global metrics");
    analyze->add_option("--width", default_w, "Image width for sessions without a size line");
    analyze->add_option("--height", default_h, "Image height for sessions without a size line");

    // synth
    auto *synth = app.add_subcommand("synth", "Generate a trace from a gesture script");
    std::string script_path, synth_out;
    synth->add_option("script", script_path, "ts-synth/1 script")->required();
    synth->add_option("-o,--output", synth_out, "Trace file to write")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return kUsage;
    }

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    try
    {
        effective(cfg);
        if (*serve || *record)
        {
            ServeOptions opt;
            opt.bridge = net::parse_endpoint(bridge_ep);
            opt.exit_on_bridge_disconnect = exit_on_disconnect;
            if (*serve)
            {
                opt.viewer = net::parse_endpoint(viewer_ep);
                opt.config = cfg;
                opt.log_path = log_path;
                opt.session_id = session_id;
                opt.viewer_mailbox = mailbox;
                opt.render_timeout = std::chrono::milliseconds(render_timeout_ms);
                if (!record_path.empty())
                    opt.record_path = record_path;
                return run_server(std::move(opt), static_dir, http_ep);
            }
            opt.record_only = true;
            opt.record_path = record_out;
            return run_server(std::move(opt), "", "");
        }
        if (*replay_cmd)
        {
            ReplayOptions opt;
            opt.config = cfg;
            opt.session_id = replay_session;
            opt.realtime = realtime;
            if (!replay_log.empty())
                opt.log_path = replay_log;
            if (!commands_path.empty())
                opt.commands_path = commands_path;
            auto frames = read_trace(trace_path);
            auto result = replay(frames, opt);
            print_report(result.report, FluidBand{}, format, radar);
            if (!frames.empty())
            {
                std::cerr << fmt::format("engine-only: {} frames in {:.3f} ms ({:.4f} ms/frame)\n", frames.size(),
                                         result.engine_ms, result.engine_ms / static_cast<double>(frames.size()));
            }
            return kOk;
        }
        if (*analyze)
        {
            FluidBand band;
            for (const auto &o : band_overrides)
                apply_band_override(band, o);
            LogData data;
            for (const auto &path : logs)
                data.append(read_log(path));
            auto rep = compute_metrics(data, SessionInfo{default_w, default_h});
            print_report(rep, band, format, radar);
            if (rep.total_rows == 0)
            {
                std::cerr << "no rows to analyze\n";
                return kInsufficientData;
            }
            return classify(rep, band).out_of_band() ? kOutOfBand : kOk;
        }
        if (*synth)
        {
            std::ifstream in(script_path);
            if (!in)
                throw IoFailure("cannot open script " + script_path);
            auto frames = synthesize(parse_synth_script(in), cfg);
            write_trace(synth_out, frames);
            std::cerr << "wrote " << frames.size() << " frames to " << synth_out << "\n";
            return kOk;
        }
    }
    catch (const IoFailure &e)
    {
        std::cerr << "I/O failure: " << e.what() << "\n";
        return kIo;
    }
    catch (const MalformedTrace &e)
    {
        std::cerr << "malformed trace: " << e.what() << "\n";
        return kMalformedTrace;
    }
    catch (const SchemaMismatch &e)
    {
        std::cerr << "schema mismatch (column '" << e.column() << "'): " << e.what() << "\n";
        return kSchemaMismatch;
    }
    catch (const ConfigInvalid &e)
    {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kConfigInvalid;
    }
    catch (const SpecInvalid &e)
    {
        std::cerr << "invalid synth script: " << e.what() << "\n";
        return kSpecInvalid;
    }
    catch (const net::NetError &e)
    {
        std::cerr << "network error: " << e.what() << "\n";
        return kNetwork;
    }
    catch (const std::invalid_argument &e)
    {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}
