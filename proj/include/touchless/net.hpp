#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace touchless::net
{
    class NetError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    struct Endpoint
    {
        std::string host = "127.0.0.1";
        std::uint16_t port = 0;
    };

    /// "host:port", ":port" or "port".
    inline Endpoint parse_endpoint(std::string_view s, std::string_view default_host = "127.0.0.1")
    {
        Endpoint ep;
        ep.host = std::string(default_host);
        std::string_view port = s;
        if (auto colon = s.rfind(':'); colon != std::string_view::npos)
        {
            if (colon > 0)
                ep.host = std::string(s.substr(0, colon));
            port = s.substr(colon + 1);
        }
        if (port.empty())
            throw std::invalid_argument("endpoint '" + std::string(s) + "' has no port");
        unsigned long v = 0;
        for (char c : port)
        {
            if (c < '0' || c > '9')
                throw std::invalid_argument("endpoint '" + std::string(s) + "' has a bad port");
            v = v * 10 + static_cast<unsigned long>(c - '0');
            if (v > 65535)
                throw std::invalid_argument("endpoint '" + std::string(s) + "' port out of range");
        }
        ep.port = static_cast<std::uint16_t>(v);
        return ep;
    }

    class Socket
    {
    public:
        Socket() = default;
        explicit Socket(int fd) noexcept : fd_(fd) {}
        Socket(Socket &&o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
        Socket &operator=(Socket &&o) noexcept
        {
            if (this != &o)
            {
                close();
                fd_ = std::exchange(o.fd_, -1);
            }
            return *this;
        }
        Socket(const Socket &) = delete;
        Socket &operator=(const Socket &) = delete;
        ~Socket() { close(); }

        int fd() const noexcept { return fd_; }
        bool valid() const noexcept { return fd_ >= 0; }

        void close() noexcept
        {
            if (fd_ >= 0)
            {
                ::close(fd_);
                fd_ = -1;
            }
        }

        // Unblocks a reader in another thread.
        void shutdown() noexcept
        {
            if (fd_ >= 0)
                ::shutdown(fd_, SHUT_RDWR);
        }

        bool send_all(std::string_view data) noexcept
        {
            while (!data.empty())
            {
                const ssize_t n = ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
                if (n < 0)
                {
                    if (errno == EINTR)
                        continue;
                    return false;
                }
                data.remove_prefix(static_cast<std::size_t>(n));
            }
            return true;
        }

        bool send_line(std::string_view line) noexcept
        {
            std::string buf;
            buf.reserve(line.size() + 1);
            buf.append(line);
            buf.push_back('\n');
            return send_all(buf);
        }

        // True if readable (or closed) within the timeout.
        bool wait_readable(std::chrono::milliseconds timeout) const noexcept
        {
            pollfd p{fd_, POLLIN, 0};
            return ::poll(&p, 1, static_cast<int>(timeout.count())) > 0;
        }

    private:
        int fd_ = -1;
    };

    inline sockaddr_in resolve(const Endpoint &ep)
    {
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(ep.port);
        if (ep.host.empty() || ep.host == "*" || ep.host == "0.0.0.0")
        {
            addr.sin_addr.s_addr = htonl(INADDR_ANY);
            return addr;
        }
        if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) == 1)
            return addr;
        addrinfo hints{};
        hints.ai_family = AF_INET;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo *res = nullptr;
        if (::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr)
            throw NetError("cannot resolve host '" + ep.host + "'");
        addr.sin_addr = reinterpret_cast<sockaddr_in *>(res->ai_addr)->sin_addr;
        ::freeaddrinfo(res);
        return addr;
    }

    /// Listening socket; port 0 binds an ephemeral port (see local_port()).
    inline Socket listen_on(const Endpoint &ep, int backlog = 8)
    {
        Socket s(::socket(AF_INET, SOCK_STREAM, 0));
        if (!s.valid())
            throw NetError(std::string("socket: ") + std::strerror(errno));
        int one = 1;
        ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in addr = resolve(ep);
        if (::bind(s.fd(), reinterpret_cast<sockaddr *>(&addr), sizeof(addr)) != 0)
            throw NetError("bind " + ep.host + ":" + std::to_string(ep.port) + ": " + std::strerror(errno));
        if (::listen(s.fd(), backlog) != 0)
            throw NetError(std::string("listen: ") + std::strerror(errno));
        return s;
    }

    inline std::uint16_t local_port(const Socket &s)
    {
        sockaddr_in addr{};
        socklen_t len = sizeof(addr);
        if (::getsockname(s.fd(), reinterpret_cast<sockaddr *>(&addr), &len) != 0)
            throw NetError(std::string("getsockname: ") + std::strerror(errno));
        return ntohs(addr.sin_port);
    }

    inline void set_nodelay(const Socket &s) noexcept
    {
        int one = 1;
        ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    }

    // Bounds how long a send may block on a peer that stopped reading.
    inline void set_send_timeout(const Socket &s, std::chrono::milliseconds timeout) noexcept
    {
        timeval tv{};
        tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
        tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
        ::setsockopt(s.fd(), SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
    }

    /// Waits up to `timeout` for a connection.
    inline std::optional<Socket> accept_for(const Socket &listener, std::chrono::milliseconds timeout)
    {
        if (!listener.wait_readable(timeout))
            return std::nullopt;
        int fd = ::accept(listener.fd(), nullptr, nullptr);
        if (fd < 0)
            return std::nullopt;
        Socket s(fd);
        set_nodelay(s);
        return s;
    }

    inline Socket connect_to(const Endpoint &ep)
    {
        Socket s(::socket(AF_INET, SOCK_STREAM, 0));
        if (!s.valid())
            throw NetError(std::string("socket: ") + std::strerror(errno));
        sockaddr_in addr = resolve(ep);
        if (::connect(s.fd(), reinterpret_cast<sockaddr *>(&addr), sizeof(addr)) != 0)
            throw NetError("connect " + ep.host + ":" + std::to_string(ep.port) + ": " + std::strerror(errno));
        set_nodelay(s);
        return s;
    }

    /// Splits a byte stream into newline-terminated lines.
    class LineReader
    {
    public:
        explicit LineReader(std::size_t max_line = 1 << 20) : max_line_(max_line) {}

        enum class Status
        {
            line,
            timeout,
            closed,
            overlong,
        };

        // On Status::line, `out` holds the line without its terminator.
        Status next(Socket &s, std::string &out, std::chrono::milliseconds timeout)
        {
            while (true)
            {
                if (auto nl = buffer_.find('\n', scanned_); nl != std::string::npos)
                {
                    out.assign(buffer_, 0, nl);
                    if (!out.empty() && out.back() == '\r')
                        out.pop_back();
                    buffer_.erase(0, nl + 1);
                    scanned_ = 0;
                    return Status::line;
                }
                scanned_ = buffer_.size();
                if (buffer_.size() > max_line_)
                {
                    buffer_.clear();
                    scanned_ = 0;
                    discarding_ = true;
                    return Status::overlong;
                }
                if (!s.wait_readable(timeout))
                    return Status::timeout;
                char chunk[8192];
                const ssize_t n = ::recv(s.fd(), chunk, sizeof(chunk), 0);
                if (n < 0 && errno == EINTR)
                    continue;
                if (n <= 0)
                    return Status::closed;
                std::string_view data(chunk, static_cast<std::size_t>(n));
                if (discarding_)
                {
                    auto nl = data.find('\n');
                    if (nl == std::string_view::npos)
                        continue;
                    data.remove_prefix(nl + 1);
                    discarding_ = false;
                }
                buffer_.append(data);
            }
        }

    private:
        std::string buffer_;
        std::size_t scanned_ = 0;
        std::size_t max_line_;
        bool discarding_ = false;
    };

    /// Microseconds on the host's monotonic clock; shared by all processes on the machine.
    inline std::uint64_t monotonic_us() noexcept
    {
        return static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now().time_since_epoch()).count());
    }
}
