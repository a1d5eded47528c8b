#pragma once

// Lockstep plant <-> stabilizer exchange over a local TCP stream. One ASCII
// line per message, one request/reply pair per control step:
//   client: INIT <h_c>        server: OK
//   client: STEP <k> <t> <w>  server: U <k> <upss>
//   client: DONE              server: BYE

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "swingbench/config.hpp"
#include "swingbench/format.hpp"
#include "swingbench/scenario.hpp"
#include "swingbench/sim.hpp"
#include "swingbench/timeseries.hpp"

namespace swingbench {

/// Violations of the wire contract (bad grammar, ordering, handshake,
/// transport failures). Distinct so callers can map them to their own
/// error domain.
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BridgeMessage {
    enum class Type { Init, Ok, Step, U, Done, Bye };
    Type type = Type::Ok;
    long k = 0;
    double h_c = 0.0;  // Init
    double t = 0.0;    // Step
    double omega = 0.0; // Step
    double upss = 0.0; // U

    static BridgeMessage init(double h_c) { return {Type::Init, 0, h_c, 0, 0, 0}; }
    static BridgeMessage ok() { return {Type::Ok, 0, 0, 0, 0, 0}; }
    static BridgeMessage step(long k, double t, double omega) {
        return {Type::Step, k, 0, t, omega, 0};
    }
    static BridgeMessage u(long k, double upss) { return {Type::U, k, 0, 0, 0, upss}; }
    static BridgeMessage done() { return {Type::Done, 0, 0, 0, 0, 0}; }
    static BridgeMessage bye() { return {Type::Bye, 0, 0, 0, 0, 0}; }
};

inline std::string encode(const BridgeMessage& m) {
    switch (m.type) {
        case BridgeMessage::Type::Init: return "INIT " + format_double(m.h_c);
        case BridgeMessage::Type::Ok: return "OK";
        case BridgeMessage::Type::Step:
            return "STEP " + std::to_string(m.k) + " " + format_double(m.t) + " " +
                   format_double(m.omega);
        case BridgeMessage::Type::U:
            return "U " + std::to_string(m.k) + " " + format_double(m.upss);
        case BridgeMessage::Type::Done: return "DONE";
        case BridgeMessage::Type::Bye: return "BYE";
    }
    throw std::logic_error("encode: unreachable");
}

inline BridgeMessage decode(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> tok;
    std::string t;
    while (in >> t) tok.push_back(t);
    if (tok.empty()) throw ProtocolError("decode: empty line");
    auto arity = [&](std::size_t n) {
        if (tok.size() != n)
            throw ProtocolError("decode: '" + tok[0] + "' expects " +
                                     std::to_string(n - 1) + " arguments, got " +
                                     std::to_string(tok.size() - 1));
    };
    auto num = [&](std::size_t i) {
        try {
            return parse_double(tok[i]);
        } catch (const std::exception&) {
            throw ProtocolError("decode: bad number in token " +
                                     std::to_string(i + 1) + ": '" + tok[i] + "'");
        }
    };
    auto integer = [&](std::size_t i) {
        try {
            return parse_long(tok[i]);
        } catch (const std::exception&) {
            throw ProtocolError("decode: bad integer in token " +
                                     std::to_string(i + 1) + ": '" + tok[i] + "'");
        }
    };
    if (tok[0] == "INIT") {
        arity(2);
        return BridgeMessage::init(num(1));
    }
    if (tok[0] == "OK") {
        arity(1);
        return BridgeMessage::ok();
    }
    if (tok[0] == "STEP") {
        arity(4);
        return BridgeMessage::step(integer(1), num(2), num(3));
    }
    if (tok[0] == "U") {
        arity(3);
        return BridgeMessage::u(integer(1), num(2));
    }
    if (tok[0] == "DONE") {
        arity(1);
        return BridgeMessage::done();
    }
    if (tok[0] == "BYE") {
        arity(1);
        return BridgeMessage::bye();
    }
    throw ProtocolError("decode: unknown verb '" + tok[0] + "'");
}

namespace detail {

class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
    Socket& operator=(Socket&& other) noexcept {
        if (this != &other) {
            close_fd();
            fd_ = other.fd_;
            other.fd_ = -1;
        }
        return *this;
    }
    ~Socket() { close_fd(); }

    int fd() const { return fd_; }
    bool valid() const { return fd_ >= 0; }

    void set_timeout(double seconds) {
        timeval tv{};
        tv.tv_sec = static_cast<long>(seconds);
        tv.tv_usec = static_cast<long>((seconds - tv.tv_sec) * 1e6);
        setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
        setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
    }

    void send_line(const std::string& line) {
        std::string buf = line + "\n";
        std::size_t sent = 0;
        while (sent < buf.size()) {
            const ssize_t n = ::send(fd_, buf.data() + sent, buf.size() - sent, 0);
            if (n <= 0) throw ProtocolError("bridge: connection lost on send");
            sent += static_cast<std::size_t>(n);
        }
    }

    /// Reads up to the next LF; nullopt on orderly close at a line boundary.
    std::optional<std::string> recv_line() {
        for (;;) {
            const std::size_t pos = rxbuf_.find('\n');
            if (pos != std::string::npos) {
                std::string line = rxbuf_.substr(0, pos);
                rxbuf_.erase(0, pos + 1);
                return line;
            }
            char chunk[512];
            const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
            if (n == 0) {
                if (rxbuf_.empty()) return std::nullopt;
                throw ProtocolError("bridge: connection closed mid-line");
            }
            if (n < 0) throw ProtocolError("bridge: receive failed or timed out");
            rxbuf_.append(chunk, static_cast<std::size_t>(n));
        }
    }

private:
    void close_fd() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }
    int fd_ = -1;
    std::string rxbuf_;
};

inline Socket connect_to(const std::string& host, int port, double timeout_s) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string port_str = std::to_string(port);
    if (getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res) != 0 || !res)
        throw ProtocolError("bridge: cannot resolve " + host);
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) {
        freeaddrinfo(res);
        throw ProtocolError("bridge: socket() failed");
    }
    Socket sock(fd);
    const int rc = ::connect(fd, res->ai_addr, res->ai_addrlen);
    freeaddrinfo(res);
    if (rc != 0)
        throw ProtocolError("bridge: cannot connect to " + host + ":" + port_str);
    sock.set_timeout(timeout_s);
    return sock;
}

} // namespace detail

class BridgeListener {
public:
    explicit BridgeListener(int port) {
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw ProtocolError("bridge: socket() failed");
        listener_ = detail::Socket(fd);
        const int one = 1;
        setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = htons(static_cast<uint16_t>(port));
        if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
            throw ProtocolError("bridge: cannot bind port " + std::to_string(port));
        if (::listen(fd, 1) != 0)
            throw ProtocolError("bridge: listen() failed");
        socklen_t len = sizeof(addr);
        getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
        port_ = ntohs(addr.sin_port);
    }

    int port() const { return port_; }

    detail::Socket accept(double timeout_s) {
        const int fd = ::accept(listener_.fd(), nullptr, nullptr);
        if (fd < 0) throw ProtocolError("bridge: accept() failed");
        detail::Socket conn(fd);
        conn.set_timeout(timeout_s);
        return conn;
    }

private:
    detail::Socket listener_;
    int port_ = 0;
};

/// Hosts a stabilizer: handshake, then one U reply per STEP until DONE.
/// `stabilizer` maps the speed deviation of each control sample to upss.
/// `replay` (optional) logs every message, '>' received and '<' sent.
inline void serve_stabilizer(const std::function<double(double)>& stabilizer,
                             BridgeListener& listener, std::ostream* replay = nullptr,
                             double timeout_s = 10.0) {
    detail::Socket conn = listener.accept(timeout_s);
    auto recv_msg = [&]() {
        auto line = conn.recv_line();
        if (!line) throw ProtocolError("bridge: peer closed before DONE");
        if (replay) *replay << "> " << *line << "\n";
        return decode(*line);
    };
    auto send_msg = [&](const BridgeMessage& m) {
        const std::string line = encode(m);
        if (replay) *replay << "< " << line << "\n";
        conn.send_line(line);
    };
    const BridgeMessage hello = recv_msg();
    if (hello.type != BridgeMessage::Type::Init)
        throw ProtocolError("bridge: expected INIT");
    send_msg(BridgeMessage::ok());
    long expected_k = 0;
    for (;;) {
        const BridgeMessage msg = recv_msg();
        if (msg.type == BridgeMessage::Type::Done) {
            send_msg(BridgeMessage::bye());
            return;
        }
        if (msg.type != BridgeMessage::Type::Step)
            throw ProtocolError("bridge: expected STEP or DONE");
        if (msg.k != expected_k)
            throw ProtocolError("bridge: out-of-order step " +
                                     std::to_string(msg.k) + ", expected " +
                                     std::to_string(expected_k));
        send_msg(BridgeMessage::u(msg.k, stabilizer(msg.omega - 1.0)));
        ++expected_k;
    }
}

/// Runs a scenario with the stabilizer hosted behind the bridge. Each control
/// step blocks on the matching U reply; the trajectory is recorded exactly as
/// in-process runs record it.
inline TimeSeries run_plant_with_bridge(const SimConfig& cfg, const Scenario& sc,
                                        const std::string& host, int port,
                                        double timeout_s = 10.0) {
    detail::Socket conn = detail::connect_to(host, port, timeout_s);
    auto exchange = [&](const BridgeMessage& m) {
        conn.send_line(encode(m));
        auto line = conn.recv_line();
        if (!line) throw ProtocolError("bridge: server closed connection");
        return decode(*line);
    };
    const BridgeMessage ack = exchange(BridgeMessage::init(cfg.timing.h_c));
    if (ack.type != BridgeMessage::Type::Ok)
        throw ProtocolError("bridge: handshake rejected");
    long last_k = -1;
    TimeSeries ts;
    try {
        ts = simulate(cfg.plant, cfg.network, cfg.timing, sc,
                      [&](long k, double t, double omega) {
                          const BridgeMessage reply =
                              exchange(BridgeMessage::step(k, t, omega));
                          if (reply.type != BridgeMessage::Type::U)
                              throw ProtocolError("bridge: expected U reply");
                          if (reply.k != k)
                              throw ProtocolError(
                                  "bridge: reply for step " + std::to_string(reply.k) +
                                  ", expected " + std::to_string(k));
                          last_k = k;
                          return reply.upss;
                      });
    } catch (const std::exception& e) {
        throw ProtocolError(std::string(e.what()) +
                                 " (last completed step " + std::to_string(last_k) + ")");
    }
    const BridgeMessage farewell = exchange(BridgeMessage::done());
    if (farewell.type != BridgeMessage::Type::Bye)
        throw ProtocolError("bridge: expected BYE");
    return ts;
}

} // namespace swingbench
