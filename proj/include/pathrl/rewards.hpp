#pragma once

#include <array>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathrl/corpus.hpp"
#include "pathrl/errors.hpp"

namespace pathrl {

struct RewardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidFormat : RewardError {
    using RewardError::RewardError;
};
struct EmptyReference : RewardError {
    using RewardError::RewardError;
};

// A parsed <think>/<caption>/<answer> triple. Segment bodies are trimmed and
// contain no tag markers; raw keeps the original text.
struct StructuredOutput {
    std::string think;
    std::string caption;
    std::string answer;
    std::string raw;
};

// 1 iff the text is exactly: optional whitespace, <think>body</think>,
// optional whitespace, <caption>body</caption>, optional whitespace,
// <answer>body</answer>, optional whitespace. Each tag pair exactly once, in
// that order, bodies free of any tag marker, nothing else outside.
int format_reward(std::string_view text);

StructuredOutput parse_structured_output(std::string_view text);

// Canonical rendering; format_reward(render_structured_output(s)) == 1 for
// any s whose segments are tag-free.
std::string render_structured_output(const StructuredOutput& s);

struct EmbeddingVector {
    std::vector<double> values;

    double norm() const;
};

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

struct EmbedConfig {
    int n_max = 3;
    int dim = 256;
};

// Text embedding backend. The default is the deterministic hashed character
// n-gram embedder; an external encoder can be swapped in behind this
// interface (see EmbeddingServiceClient).
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual EmbeddingVector embed(std::string_view text) const = 0;
    virtual int dim() const = 0;
};

// Counts character n-grams for n = 1..n_max over the UTF-8 code point
// sequence (whitespace included), buckets each n-gram by FNV-1a 64 of its
// bytes modulo dim, then L2-normalizes. Empty text gives the zero vector.
class HashEmbedder : public Embedder {
public:
    explicit HashEmbedder(EmbedConfig config = {});
    EmbeddingVector embed(std::string_view text) const override;
    int dim() const override { return config_.dim; }

private:
    EmbedConfig config_;
};

EmbeddingVector embed_text(std::string_view text, const EmbedConfig& config = {});

double caption_reward(std::string_view generated, std::string_view reference,
                      const Embedder& embedder);
double caption_reward(std::string_view generated, std::string_view reference);

struct NgramPrecision {
    std::size_t matches = 0;
    std::size_t candidates = 0;
};

// Clipped n-gram precision counts: candidates = max(len(hyp) - n + 1, 0),
// matches clipped by reference multiplicity.
NgramPrecision ngram_precision(const TokenSequence& reference, const TokenSequence& hypothesis,
                               std::size_t n);

struct BleuConfig {
    TokenizerMode mode = TokenizerMode::character;
    std::size_t max_n = 4;
    std::vector<double> weights;  // empty = uniform 1/max_n
    bool smoothing = false;       // add-one on orders >= 2
    bool brevity_penalty = false; // off by default, the score has no length correction
};

// Geometric mean of clipped n-gram precisions. Orders with zero candidate
// n-grams are dropped and the weights renormalized; any remaining zero
// precision makes the score 0 unless smoothing is on. Throws EmptyReference
// when the reference has no tokens.
double bleu(std::string_view reference, std::string_view hypothesis, const BleuConfig& config = {});

struct RewardWeights {
    double format = 1.0 / 3.0;
    double caption = 1.0 / 3.0;
    double answer = 1.0 / 3.0;
};

struct RewardBreakdown {
    int format = 0;
    double caption = 0.0;
    double answer = 0.0;
    double total = 0.0;
    RewardWeights weights_used;
};

struct RewardConfig {
    RewardWeights weights;
    EmbedConfig embed;
    BleuConfig bleu;
};

// The composite reward: format gate first, then caption cosine against the
// reference findings and answer BLEU against the reference diagnosis. When
// the reference has no findings the caption term is dropped and the format
// and answer weights rescaled to keep the same total range.
RewardBreakdown composite_reward(std::string_view output, const ReportRecord& reference,
                                 const RewardConfig& config, const Embedder& embedder);
RewardBreakdown composite_reward(std::string_view output, const ReportRecord& reference,
                                 const RewardConfig& config = {});

}  // namespace pathrl
