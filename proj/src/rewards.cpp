#include "pathrl/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pathrl/rng.hpp"
#include "pathrl/text.hpp"

namespace pathrl {

namespace {

constexpr std::array<std::string_view, 6> kTagMarkers = {"<think>",   "</think>", "<caption>",
                                                         "</caption>", "<answer>", "</answer>"};

bool contains_any_tag(std::string_view body) {
    for (auto tag : kTagMarkers)
        if (body.find(tag) != std::string_view::npos) return true;
    return false;
}

struct Segment {
    std::string_view body;
    bool ok = false;
};

// Consumes optional whitespace, then <tag>body</tag>. body extends to the
// first occurrence of the closing tag.
Segment take_segment(std::string_view& rest, std::string_view open, std::string_view close) {
    Segment seg;
    std::size_t i = 0;
    while (i < rest.size() && std::isspace(static_cast<unsigned char>(rest[i]))) ++i;
    rest.remove_prefix(i);
    if (!starts_with(rest, open)) return seg;
    rest.remove_prefix(open.size());
    const std::size_t end = rest.find(close);
    if (end == std::string_view::npos) return seg;
    seg.body = rest.substr(0, end);
    rest.remove_prefix(end + close.size());
    seg.ok = true;
    return seg;
}

struct ParsedTriple {
    std::string_view think, caption, answer;
    bool ok = false;
};

ParsedTriple scan_triple(std::string_view text) {
    ParsedTriple out;
    std::string_view rest = text;
    Segment think = take_segment(rest, "<think>", "</think>");
    if (!think.ok) return out;
    Segment caption = take_segment(rest, "<caption>", "</caption>");
    if (!caption.ok) return out;
    Segment answer = take_segment(rest, "<answer>", "</answer>");
    if (!answer.ok) return out;
    if (!is_blank(rest)) return out;  // no non-whitespace after the last tag
    if (contains_any_tag(think.body) || contains_any_tag(caption.body) ||
        contains_any_tag(answer.body))
        return out;
    out.think = think.body;
    out.caption = caption.body;
    out.answer = answer.body;
    out.ok = true;
    return out;
}

}  // namespace

int format_reward(std::string_view text) {
    return scan_triple(text).ok ? 1 : 0;
}

StructuredOutput parse_structured_output(std::string_view text) {
    ParsedTriple t = scan_triple(text);
    if (!t.ok) throw InvalidFormat("text does not match the <think>/<caption>/<answer> grammar");
    StructuredOutput out;
    out.think = trim(t.think);
    out.caption = trim(t.caption);
    out.answer = trim(t.answer);
    out.raw = std::string(text);
    return out;
}

std::string render_structured_output(const StructuredOutput& s) {
    return "<think>" + s.think + "</think><caption>" + s.caption + "</caption><answer>" +
           s.answer + "</answer>";
}

double EmbeddingVector::norm() const {
    double sum = 0.0;
    for (double v : values) sum += v * v;
    return std::sqrt(sum);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.values.size() != b.values.size())
        throw DimensionMismatch("cosine dimensions differ: " + std::to_string(a.values.size()) +
                                " vs " + std::to_string(b.values.size()));
    const double na = a.norm(), nb = b.norm();
    if (na < 1e-12 || nb < 1e-12) return 0.0;
    double dot = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
    return dot / (na * nb);
}

HashEmbedder::HashEmbedder(EmbedConfig config) : config_(config) {}

EmbeddingVector HashEmbedder::embed(std::string_view text) const {
    EmbeddingVector out;
    out.values.assign(static_cast<std::size_t>(config_.dim), 0.0);
    const auto cps = utf8_codepoints(text);
    for (int n = 1; n <= config_.n_max; ++n) {
        if (cps.size() < static_cast<std::size_t>(n)) break;
        for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= cps.size(); ++i) {
            // The n-gram is the contiguous byte span of its code points.
            const char* begin = cps[i].data();
            const std::string_view last = cps[i + static_cast<std::size_t>(n) - 1];
            const std::string_view gram(begin,
                                        static_cast<std::size_t>(last.data() + last.size() - begin));
            const std::size_t bucket = fnv1a64(gram) % static_cast<std::uint64_t>(config_.dim);
            out.values[bucket] += 1.0;
        }
    }
    const double norm = out.norm();
    if (norm > 0.0)
        for (double& v : out.values) v /= norm;
    return out;
}

EmbeddingVector embed_text(std::string_view text, const EmbedConfig& config) {
    return HashEmbedder(config).embed(text);
}

double caption_reward(std::string_view generated, std::string_view reference,
                      const Embedder& embedder) {
    return cosine(embedder.embed(generated), embedder.embed(reference));
}

double caption_reward(std::string_view generated, std::string_view reference) {
    return caption_reward(generated, reference, HashEmbedder());
}

NgramPrecision ngram_precision(const TokenSequence& reference, const TokenSequence& hypothesis,
                               std::size_t n) {
    NgramPrecision out;
    if (n == 0) throw RewardError("n-gram order must be >= 1");
    if (hypothesis.tokens.size() < n) return out;  // (0, 0)
    out.candidates = hypothesis.tokens.size() - n + 1;

    auto grams = [n](const std::vector<std::string>& tokens) {
        std::map<std::vector<std::string>, std::size_t> counts;
        if (tokens.size() >= n)
            for (std::size_t i = 0; i + n <= tokens.size(); ++i)
                counts[{tokens.begin() + static_cast<std::ptrdiff_t>(i),
                        tokens.begin() + static_cast<std::ptrdiff_t>(i + n)}]++;
        return counts;
    };
    const auto ref_counts = grams(reference.tokens);
    const auto hyp_counts = grams(hypothesis.tokens);
    for (const auto& [gram, count] : hyp_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) out.matches += std::min(count, it->second);
    }
    return out;
}

double bleu(std::string_view reference, std::string_view hypothesis, const BleuConfig& config) {
    const TokenSequence ref = tokenize(reference, config.mode);
    const TokenSequence hyp = tokenize(hypothesis, config.mode);
    if (ref.tokens.empty()) throw EmptyReference("reference tokenizes to zero tokens");
    if (config.max_n == 0) throw RewardError("max_n must be >= 1");

    std::vector<double> weights = config.weights;
    if (weights.empty())
        weights.assign(config.max_n, 1.0 / static_cast<double>(config.max_n));
    if (weights.size() != config.max_n) throw RewardError("need one weight per n-gram order");
    double wsum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw RewardError("weights must be non-negative");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw RewardError("weights must sum to 1");

    // Orders with zero candidates are excluded and the weights renormalized
    // over the remaining ones; a hypothesis with no tokens at all scores 0.
    double kept_weight = 0.0;
    std::vector<std::pair<double, double>> kept;  // (weight, precision)
    for (std::size_t n = 1; n <= config.max_n; ++n) {
        NgramPrecision p = ngram_precision(ref, hyp, n);
        if (p.candidates == 0) continue;
        double matches = static_cast<double>(p.matches);
        double candidates = static_cast<double>(p.candidates);
        if (config.smoothing && n >= 2) {
            matches += 1.0;
            candidates += 1.0;
        }
        kept.emplace_back(weights[n - 1], matches / candidates);
        kept_weight += weights[n - 1];
    }
    if (kept.empty() || kept_weight <= 0.0) return 0.0;

    double log_sum = 0.0;
    for (const auto& [w, p] : kept) {
        if (p <= 0.0) return 0.0;  // strict: any included zero precision zeroes the score
        log_sum += (w / kept_weight) * std::log(p);
    }
    double score = std::exp(log_sum);
    if (config.brevity_penalty && hyp.tokens.size() < ref.tokens.size()) {
        const double r = static_cast<double>(ref.tokens.size());
        const double h = static_cast<double>(hyp.tokens.size());
        score *= std::exp(1.0 - r / h);
    }
    return score;
}

RewardBreakdown composite_reward(std::string_view output, const ReportRecord& reference,
                                 const RewardConfig& config, const Embedder& embedder) {
    const RewardWeights& w = config.weights;
    if (w.format < 0.0 || w.caption < 0.0 || w.answer < 0.0)
        throw RewardError("reward weights must be non-negative");

    RewardBreakdown out;
    out.weights_used = w;
    out.format = format_reward(output);
    if (out.format == 0) return out;  // gate: malformed output scores 0 everywhere

    const StructuredOutput parsed = parse_structured_output(output);
    out.answer = bleu(reference.diagnosis, parsed.answer, config.bleu);

    if (reference.has_findings()) {
        out.caption = caption_reward(parsed.caption, *reference.findings, embedder);
        out.total = w.format * out.format + w.caption * out.caption + w.answer * out.answer;
        return out;
    }

    // No reference findings: drop the caption term and rescale the remaining
    // weights so their sum matches the full weight budget.
    const double budget = w.format + w.caption + w.answer;
    const double remaining = w.format + w.answer;
    RewardWeights used{0.0, 0.0, 0.0};
    if (remaining > 0.0) {
        const double scale = budget / remaining;
        used.format = w.format * scale;
        used.answer = w.answer * scale;
    }
    out.weights_used = used;
    out.total = used.format * out.format + used.answer * out.answer;
    return out;
}

RewardBreakdown composite_reward(std::string_view output, const ReportRecord& reference,
                                 const RewardConfig& config) {
    return composite_reward(output, reference, config, HashEmbedder(config.embed));
}

}  // namespace pathrl
