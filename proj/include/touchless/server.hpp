#pragma once

#include "touchless/bounded_queue.hpp"
#include "touchless/net.hpp"
#include "touchless/pipeline.hpp"
#include "touchless/protocol.hpp"
#include "touchless/session_log.hpp"

#include <atomic>
#include <deque>
#include <exception>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace touchless
{
    struct ServeOptions
    {
        net::Endpoint bridge{"127.0.0.1", 7465};
        net::Endpoint viewer{"127.0.0.1", 7466};
        ModeConfig config;
        std::filesystem::path log_path = "session.csv";
        std::string session_id = "live";
        std::size_t frame_queue = 256;
        // Per-viewer outbound capacity; beyond it the oldest message is dropped.
        std::size_t viewer_mailbox = 64;
        // How long a logged row waits for a viewer's presentation ack.
        std::chrono::milliseconds render_timeout{500};
        bool exit_on_bridge_disconnect = false;
        // Optional copy of every accepted frame, written as a ts-trace/1 file.
        std::optional<std::filesystem::path> record_path;
        // Engine disabled: only record (the `record` subcommand).
        bool record_only = false;
    };

    struct ServeSummary
    {
        SessionSummary session;
        std::size_t frames_accepted = 0;
        std::size_t malformed_messages = 0;
        std::size_t schema_violations = 0;
        std::size_t out_of_order = 0;
        std::size_t bridge_connections = 0;
        std::size_t bridge_disconnects = 0;
        std::size_t viewers_connected = 0;
        std::size_t commands_sent = 0;
        std::size_t broadcast_drops = 0;
        std::size_t acks = 0;
        std::size_t render_timeouts = 0;
        // Rows whose capture timestamp was ahead of the engine clock (proc_ms clamped to 0).
        std::size_t clock_skew_clamped = 0;
    };

    /// Live pipeline: bridge frames in, commands out to viewer subscribers, one log row per
    /// frame. Ingestion, the engine loop and each viewer connection run on their own
    /// threads; only the engine loop touches gesture state.
    class Server
    {
    public:
        explicit Server(ServeOptions opt) : opt_(std::move(opt)), frames_(opt_.frame_queue)
        {
            effective(opt_.config);
            bridge_listener_ = net::listen_on(opt_.bridge);
            if (!opt_.record_only)
                viewer_listener_ = net::listen_on(opt_.viewer);
        }

        Server(const Server &) = delete;
        Server &operator=(const Server &) = delete;

        ~Server()
        {
            stop();
            try
            {
                wait();
            }
            catch (...)
            {
            }
        }

        std::uint16_t bridge_port() const { return net::local_port(bridge_listener_); }
        std::uint16_t viewer_port() const { return opt_.record_only ? 0 : net::local_port(viewer_listener_); }

        void start()
        {
            threads_.emplace_back([this] { bridge_loop(); });
            if (!opt_.record_only)
                threads_.emplace_back([this] { viewer_accept_loop(); });
            engine_thread_ = std::thread([this] {
                try
                {
                    engine_loop();
                }
                catch (...)
                {
                    engine_error_ = std::current_exception();
                    stopping_ = true;
                    frames_.close();
                }
            });
        }

        void stop() noexcept { stopping_ = true; }

        bool stopping() const noexcept { return stopping_; }

        std::size_t viewer_count() const
        {
            std::lock_guard lock(viewers_mutex_);
            std::size_t n = 0;
            for (const auto &v : viewers_)
                n += v->alive ? 1 : 0;
            return n;
        }

        std::size_t frames_processed() const noexcept { return processed_; }

        /// Joins all threads and finalizes the log. Throws IoFailure from the logger.
        ServeSummary wait()
        {
            if (engine_thread_.joinable())
                engine_thread_.join();
            for (auto &t : threads_)
                if (t.joinable())
                    t.join();
            threads_.clear();
            {
                std::lock_guard lock(viewers_mutex_);
                for (auto &v : viewers_)
                    v->finish();
                viewers_.clear();
            }
            if (finished_)
                return summary_;
            finished_ = true;
            if (engine_error_)
                std::rethrow_exception(engine_error_);
            summary_.broadcast_drops = drops_;
            summary_.malformed_messages = malformed_;
            summary_.schema_violations = schema_violations_;
            summary_.bridge_connections = bridge_connections_;
            summary_.bridge_disconnects = bridge_disconnects_;
            summary_.viewers_connected = viewers_connected_;
            if (logger_)
            {
                summary_.session = logger_->close_session();
            }
            else if (!opt_.record_only && !std::filesystem::exists(opt_.log_path))
            {
                std::ofstream out(opt_.log_path, std::ios::binary);
                out << log_preamble();
                if (!out)
                    throw IoFailure("cannot write " + opt_.log_path.string());
            }
            if (recorder_.is_open())
            {
                recorder_.flush();
                if (!recorder_)
                    throw IoFailure("write failed for " + opt_.record_path->string());
                recorder_.close();
            }
            return summary_;
        }

    private:
        struct Subscriber
        {
            net::Socket socket;
            BoundedQueue<std::string> mailbox;
            std::mutex send_mutex;
            std::atomic<bool> alive{true};
            std::thread writer;
            std::thread reader;

            explicit Subscriber(net::Socket s, std::size_t cap) : socket(std::move(s)), mailbox(cap) {}

            bool send(std::string_view line)
            {
                std::lock_guard lock(send_mutex);
                if (!socket.send_line(line))
                {
                    alive = false;
                    return false;
                }
                return true;
            }

            // Lets the writer flush what is queued, then disconnects.
            void finish()
            {
                mailbox.close();
                if (writer.joinable())
                    writer.join();
                alive = false;
                socket.shutdown();
                if (reader.joinable())
                    reader.join();
            }
        };

        struct Ack
        {
            std::uint64_t seq;
            std::uint64_t t_presented_us;
        };

        struct Pending
        {
            FrameRecord record;
            std::optional<std::uint64_t> seq;
            std::uint64_t t_emit_us = 0;
        };

        void bridge_loop()
        {
            using namespace std::chrono_literals;
            while (!stopping_)
            {
                auto conn = net::accept_for(bridge_listener_, 50ms);
                if (!conn)
                    continue;
                ++bridge_connections_;
                net::LineReader reader;
                std::string line;
                bool open = true;
                while (open && !stopping_)
                {
                    switch (reader.next(*conn, line, 50ms))
                    {
                    case net::LineReader::Status::timeout:
                        break;
                    case net::LineReader::Status::closed:
                        open = false;
                        break;
                    case net::LineReader::Status::overlong:
                        ++malformed_;
                        break;
                    case net::LineReader::Status::line:
                        handle_bridge_line(*conn, line);
                        break;
                    }
                }
                ++bridge_disconnects_;
                if (opt_.exit_on_bridge_disconnect)
                    stopping_ = true;
            }
            frames_.close();
        }

        void handle_bridge_line(net::Socket &conn, const std::string &line)
        {
            if (line.empty())
                return;
            nlohmann::json j;
            try
            {
                j = nlohmann::json::parse(line);
                if (auto ctl = control_from_json(j))
                {
                    if (ctl->kind == ControlMessage::Kind::ping)
                        conn.send_line(encode_pong(ctl->value, net::monotonic_us()));
                    return;
                }
                LandmarkFrame f = frame_from_json(j);
                frames_.push(std::move(f));
            }
            catch (const SchemaViolation &)
            {
                ++schema_violations_;
            }
            catch (const std::exception &)
            {
                ++malformed_;
            }
        }

        void viewer_accept_loop()
        {
            using namespace std::chrono_literals;
            while (!stopping_)
            {
                auto conn = net::accept_for(viewer_listener_, 50ms);
                if (!conn)
                    continue;
                net::set_send_timeout(*conn, 1s);
                auto sub = std::make_shared<Subscriber>(std::move(*conn), opt_.viewer_mailbox);
                Subscriber *raw = sub.get();
                raw->writer = std::thread([raw] {
                    while (auto msg = raw->mailbox.pop())
                    {
                        if (!raw->send(*msg))
                            break;
                    }
                });
                raw->reader = std::thread([this, raw] { viewer_read_loop(*raw); });
                std::lock_guard lock(viewers_mutex_);
                viewers_.push_back(std::move(sub));
                ++viewers_connected_;
            }
        }

        void viewer_read_loop(Subscriber &sub)
        {
            using namespace std::chrono_literals;
            net::LineReader reader;
            std::string line;
            while (sub.alive)
            {
                auto st = reader.next(sub.socket, line, 50ms);
                if (st == net::LineReader::Status::closed)
                    break;
                if (st != net::LineReader::Status::line)
                    continue;
                try
                {
                    auto ctl = control_from_json(nlohmann::json::parse(line));
                    if (!ctl)
                        continue;
                    if (ctl->kind == ControlMessage::Kind::ping)
                    {
                        sub.send(encode_pong(ctl->value, net::monotonic_us()));
                    }
                    else
                    {
                        std::lock_guard lock(acks_mutex_);
                        acks_.push_back({ctl->value, ctl->t_presented_us});
                    }
                }
                catch (const std::exception &)
                {
                    // malformed viewer traffic is ignored
                }
            }
            sub.alive = false;
            sub.mailbox.close();
        }

        // Returns the number of live subscribers the message was queued for.
        std::size_t broadcast(const std::string &msg)
        {
            std::lock_guard lock(viewers_mutex_);
            std::size_t n = 0;
            for (auto &v : viewers_)
            {
                if (!v->alive)
                    continue;
                if (v->mailbox.push_latest(msg))
                    ++drops_;
                ++n;
            }
            return n;
        }

        void collect_acks()
        {
            std::deque<Ack> batch;
            {
                std::lock_guard lock(acks_mutex_);
                batch.swap(acks_);
            }
            for (const auto &a : batch)
            {
                // first ack per command wins
                acked_.try_emplace(a.seq, a.t_presented_us);
            }
        }

        void flush_pending(bool final)
        {
            collect_acks();
            const auto now = net::monotonic_us();
            const auto timeout_us = static_cast<std::uint64_t>(
                std::chrono::duration_cast<std::chrono::microseconds>(opt_.render_timeout).count());
            while (!pending_.empty())
            {
                Pending &p = pending_.front();
                if (p.seq)
                {
                    auto it = acked_.find(*p.seq);
                    if (it != acked_.end())
                    {
                        ++summary_.acks;
                        const double ms = it->second >= p.t_emit_us
                                              ? static_cast<double>(it->second - p.t_emit_us) / 1000.0
                                              : 0.0;
                        p.record.render_ms = ms;
                        acked_.erase(it);
                    }
                    else if (!final && now - p.t_emit_us < timeout_us)
                    {
                        break;
                    }
                    else
                    {
                        ++summary_.render_timeouts;
                    }
                }
                logger_->log_frame(std::move(p.record));
                pending_.pop_front();
            }
            // Acks for commands no longer pending are stale.
            if (pending_.empty())
                acked_.clear();
        }

        void engine_loop()
        {
            using namespace std::chrono_literals;
            std::optional<FrameProcessor> proc;
            if (!opt_.record_only)
                proc.emplace(opt_.config, opt_.session_id);
            std::optional<LandmarkFrame> last;
            while (true)
            {
                auto f = frames_.pop_for(20ms);
                if (!f)
                {
                    if (logger_)
                        flush_pending(false);
                    if (frames_.closed() && frames_.size() == 0)
                        break;
                    continue;
                }
                if (last && (f->frame_id <= last->frame_id || f->t_capture_us < last->t_capture_us))
                {
                    ++summary_.out_of_order;
                    continue;
                }
                if (last && (f->width != last->width || f->height != last->height))
                {
                    ++schema_violations_;
                    continue;
                }
                if (opt_.record_path)
                {
                    if (!recorder_.is_open())
                    {
                        recorder_.open(*opt_.record_path, std::ios::binary | std::ios::trunc);
                        if (!recorder_)
                            throw IoFailure("cannot open " + opt_.record_path->string());
                        recorder_ << "# " << kTraceSchema << '\n';
                    }
                    recorder_ << encode_wire_frame(*f) << '\n';
                }
                ++summary_.frames_accepted;
                if (proc)
                    process_frame(*proc, *f);
                last = std::move(f);
            }
            if (logger_)
                flush_pending(true);
            stopping_ = true;
        }

        void process_frame(FrameProcessor &proc, const LandmarkFrame &f)
        {
            if (!logger_)
                logger_.emplace(opt_.log_path, opt_.session_id, f.width, f.height);
            ProcessedFrame pf = proc.process(f);
            const std::uint64_t now = net::monotonic_us();
            if (f.t_capture_us > now)
            {
                ++summary_.clock_skew_clamped;
                pf.record.proc_ms = 0.0;
            }
            else
            {
                pf.record.proc_ms = static_cast<double>(now - f.t_capture_us) / 1000.0;
            }
            if (pf.record.mode != pf.previous_mode)
                broadcast(encode_mode_change(pf.record.mode, f.frame_id));
            Pending p{std::move(pf.record), std::nullopt, now};
            if (pf.command)
            {
                ++summary_.commands_sent;
                if (broadcast(encode_command(*pf.command)) > 0)
                    p.seq = pf.command->seq;
            }
            pending_.push_back(std::move(p));
            ++processed_;
            flush_pending(false);
        }

        ServeOptions opt_;
        net::Socket bridge_listener_;
        net::Socket viewer_listener_;
        BoundedQueue<LandmarkFrame> frames_;
        std::atomic<bool> stopping_{false};
        std::atomic<std::size_t> processed_{0};
        std::atomic<std::size_t> drops_{0};
        // Counters written outside the engine thread; the rest of summary_ is engine-owned.
        std::atomic<std::size_t> malformed_{0};
        std::atomic<std::size_t> schema_violations_{0};
        std::atomic<std::size_t> bridge_connections_{0};
        std::atomic<std::size_t> bridge_disconnects_{0};
        std::atomic<std::size_t> viewers_connected_{0};
        std::vector<std::thread> threads_;
        std::thread engine_thread_;

        mutable std::mutex viewers_mutex_;
        std::vector<std::shared_ptr<Subscriber>> viewers_;

        std::mutex acks_mutex_;
        std::deque<Ack> acks_;
        std::map<std::uint64_t, std::uint64_t> acked_;

        std::deque<Pending> pending_;
        std::optional<SessionLogger> logger_;
        std::ofstream recorder_;
        ServeSummary summary_;
        std::exception_ptr engine_error_;
        bool finished_ = false;
    };
}
