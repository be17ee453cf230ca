#pragma once

#include <string>

#include "pathrl/rewards.hpp"

namespace pathrl {

struct EmbeddingServiceError : RewardError {
    using RewardError::RewardError;
};

// Client for an external embedding service speaking the line protocol in
// docs/formats.md: one request line "EMBED\t<dim>\t<escaped text>\n", one
// response line "OK\t<v1>\t...\t<vdim>\n" or "ERR\t<message>\n" over a local
// TCP socket. The connection is opened lazily and kept for the client's
// lifetime.
class EmbeddingServiceClient : public Embedder {
public:
    EmbeddingServiceClient(std::string host, int port, int dim);
    ~EmbeddingServiceClient() override;

    EmbeddingServiceClient(const EmbeddingServiceClient&) = delete;
    EmbeddingServiceClient& operator=(const EmbeddingServiceClient&) = delete;

    EmbeddingVector embed(std::string_view text) const override;
    int dim() const override { return dim_; }

private:
    void ensure_connected() const;

    std::string host_;
    int port_;
    int dim_;
    mutable int fd_ = -1;
};

}  // namespace pathrl
