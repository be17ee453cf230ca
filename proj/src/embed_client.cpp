#include "pathrl/embed_client.hpp"

#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

#include "pathrl/text.hpp"

namespace pathrl {

EmbeddingServiceClient::EmbeddingServiceClient(std::string host, int port, int dim)
    : host_(std::move(host)), port_(port), dim_(dim) {
    if (dim_ < 1) throw EmbeddingServiceError("embedding dimension must be >= 1");
}

EmbeddingServiceClient::~EmbeddingServiceClient() {
    if (fd_ >= 0) ::close(fd_);
}

void EmbeddingServiceClient::ensure_connected() const {
    if (fd_ >= 0) return;
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* result = nullptr;
    const std::string port_str = std::to_string(port_);
    int rc = ::getaddrinfo(host_.c_str(), port_str.c_str(), &hints, &result);
    if (rc != 0)
        throw EmbeddingServiceError("cannot resolve " + host_ + ": " + gai_strerror(rc));
    int fd = -1;
    for (addrinfo* ai = result; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(result);
    if (fd < 0)
        throw EmbeddingServiceError("cannot connect to " + host_ + ":" + port_str);
    fd_ = fd;
}

EmbeddingVector EmbeddingServiceClient::embed(std::string_view text) const {
    ensure_connected();

    std::string request = "EMBED\t" + std::to_string(dim_) + "\t" + escape_field(text) + "\n";
    std::size_t sent = 0;
    while (sent < request.size()) {
        const ssize_t n = ::send(fd_, request.data() + sent, request.size() - sent, 0);
        if (n <= 0) throw EmbeddingServiceError("send failed: " + std::string(std::strerror(errno)));
        sent += static_cast<std::size_t>(n);
    }

    std::string line;
    char c;
    while (true) {
        const ssize_t n = ::recv(fd_, &c, 1, 0);
        if (n <= 0) throw EmbeddingServiceError("connection closed before response line");
        if (c == '\n') break;
        line += c;
        if (line.size() > (1u << 24)) throw EmbeddingServiceError("oversized response line");
    }

    auto parts = split_on(line, '\t');
    if (parts.empty()) throw EmbeddingServiceError("empty response line");
    if (parts[0] == "ERR") {
        std::string msg = parts.size() > 1 ? std::string(parts[1]) : "unspecified";
        throw EmbeddingServiceError("service error: " + msg);
    }
    if (parts[0] != "OK")
        throw EmbeddingServiceError("unexpected response tag '" + std::string(parts[0]) + "'");
    if (parts.size() != static_cast<std::size_t>(dim_) + 1)
        throw EmbeddingServiceError("expected " + std::to_string(dim_) + " values, got " +
                                    std::to_string(parts.size() - 1));
    EmbeddingVector out;
    out.values.reserve(static_cast<std::size_t>(dim_));
    for (std::size_t i = 1; i < parts.size(); ++i) {
        auto v = parse_double(parts[i]);
        if (!v) throw EmbeddingServiceError("bad float in response: '" + std::string(parts[i]) + "'");
        out.values.push_back(*v);
    }
    return out;
}

}  // namespace pathrl
