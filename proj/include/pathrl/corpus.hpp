#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathrl {

struct CorpusError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingSection : CorpusError {
    using CorpusError::CorpusError;
};
struct DuplicateSection : CorpusError {
    using CorpusError::CorpusError;
};
struct EmptyBody : CorpusError {
    using CorpusError::CorpusError;
};
struct InvalidCount : CorpusError {
    using CorpusError::CorpusError;
};
struct InsufficientRecords : CorpusError {
    using CorpusError::CorpusError;
};
struct MalformedLine : CorpusError {
    MalformedLine(std::size_t line_no, const std::string& what);
    std::size_t line_no;
};
struct DuplicateId : CorpusError {
    using CorpusError::CorpusError;
};

enum class Organ { gastric, intestinal, other };

std::string organ_name(Organ o);
std::optional<Organ> organ_from_name(std::string_view s);

// Infers the organ from the anatomical site via a fixed keyword table
// (case-insensitive substring match). Unknown sites map to Organ::other.
Organ infer_organ(std::string_view site);

// One pathology case. findings (the microscopic description) is optional;
// diagnosis is always present and non-empty.
struct ReportRecord {
    std::string id;
    std::string site;
    Organ organ = Organ::other;
    std::vector<std::string> feature_refs;
    std::optional<std::string> findings;
    std::string diagnosis;

    bool has_findings() const { return findings.has_value(); }
};

struct CorpusSplit {
    std::vector<std::string> sft;
    std::vector<std::string> grpo;
    std::vector<std::string> test;
};

enum class TokenizerMode { whitespace, character };

struct TokenSequence {
    std::vector<std::string> tokens;
    TokenizerMode mode = TokenizerMode::whitespace;
};

// whitespace mode: punctuation characters become standalone tokens, then the
// text splits on whitespace runs. character mode: one token per non-whitespace
// UTF-8 code point.
TokenSequence tokenize(std::string_view text, TokenizerMode mode);

// Plain-text report schema: sections headed by lines starting with "SITE:",
// "FINDINGS:" (optional) and "DIAGNOSIS:"; a body is the rest of the header
// line plus any following non-header lines. The returned record has an empty
// id and no feature refs; callers assign ids.
ReportRecord parse_raw_report(std::string_view raw);

// Inverse of parse_raw_report on the schema fields (site, findings,
// diagnosis). Fields must not contain lines that look like section headers.
std::string render_raw_report(const ReportRecord& rec);

// id -> feature vector, insertion-ordered on read so files round-trip.
struct FeatureTable {
    std::vector<std::pair<std::string, std::vector<double>>> rows;

    const std::vector<double>* find(std::string_view id) const;
    void add(std::string id, std::vector<double> values);
};

// Per-ROI class annotation used to train classifier heads.
struct RoiLabel {
    std::string feature_id;
    Organ organ = Organ::other;
    int class_index = 0;
};

struct SyntheticConfig {
    double captionless_fraction = 0.35;
    int feature_dim = 1536;
    int rois_per_record = 1;
    double class_mean_scale = 3.0;  // mean component magnitude, see docs
};

struct SyntheticCorpus {
    std::vector<ReportRecord> records;
    FeatureTable features;
    std::vector<RoiLabel> labels;
};

// Lesion classes per organ used by the generator; class_names(organ) lists
// them in index order. Exposed so tests and the classifier pipeline agree on
// indices.
const std::vector<std::string>& synthetic_class_names(Organ organ);
const std::vector<std::string>& synthetic_sites(Organ organ);

SyntheticCorpus generate_synthetic_corpus(int n, std::uint64_t seed,
                                          const SyntheticConfig& config = {});

CorpusSplit split_corpus(const std::vector<ReportRecord>& records, std::size_t sft_n,
                         std::size_t test_n, std::uint64_t seed);

std::vector<ReportRecord> read_corpus(const std::string& path);
void write_corpus(const std::vector<ReportRecord>& records, const std::string& path);

std::string format_corpus_line(const ReportRecord& rec);
ReportRecord parse_corpus_line(std::string_view line, std::size_t line_no);

FeatureTable read_features(const std::string& path);
void write_features(const FeatureTable& table, const std::string& path);

std::vector<RoiLabel> read_labels(const std::string& path);
void write_labels(const std::vector<RoiLabel>& labels, const std::string& path);

CorpusSplit read_split(const std::string& path);
void write_split(const CorpusSplit& split, const std::string& path);

}  // namespace pathrl
