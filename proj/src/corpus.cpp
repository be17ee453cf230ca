#include "pathrl/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "pathrl/rng.hpp"
#include "pathrl/text.hpp"

namespace pathrl {

MalformedLine::MalformedLine(std::size_t line, const std::string& what)
    : CorpusError("line " + std::to_string(line) + ": " + what), line_no(line) {}

std::string organ_name(Organ o) {
    switch (o) {
        case Organ::gastric: return "gastric";
        case Organ::intestinal: return "intestinal";
        case Organ::other: return "other";
    }
    return "other";
}

std::optional<Organ> organ_from_name(std::string_view s) {
    if (s == "gastric") return Organ::gastric;
    if (s == "intestinal") return Organ::intestinal;
    if (s == "other") return Organ::other;
    return std::nullopt;
}

namespace {

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Site keyword table. Substring match on the lowercased site; first table
// with a hit wins, anything else is "other".
constexpr std::array<std::string_view, 7> kGastricKeywords = {
    "stomach", "gastric", "antrum", "fundus", "cardia", "pylor", "lesser curvature"};
constexpr std::array<std::string_view, 13> kIntestinalKeywords = {
    "colon", "intestin", "duoden", "ileum", "ileal",  "jejun", "rectum",
    "rectal", "cecum",   "sigmoid", "bowel", "appendix", "anal"};

}  // namespace

Organ infer_organ(std::string_view site) {
    const std::string lower = to_lower(site);
    for (auto kw : kGastricKeywords)
        if (lower.find(kw) != std::string::npos) return Organ::gastric;
    for (auto kw : kIntestinalKeywords)
        if (lower.find(kw) != std::string::npos) return Organ::intestinal;
    return Organ::other;
}

TokenSequence tokenize(std::string_view text, TokenizerMode mode) {
    TokenSequence seq;
    seq.mode = mode;
    if (mode == TokenizerMode::character) {
        for (auto cp : utf8_codepoints(text)) {
            if (cp.size() == 1 && std::isspace(static_cast<unsigned char>(cp[0]))) continue;
            seq.tokens.emplace_back(cp);
        }
        return seq;
    }
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            seq.tokens.push_back(current);
            current.clear();
        }
    };
    for (auto cp : utf8_codepoints(text)) {
        if (cp.size() == 1) {
            const unsigned char c = static_cast<unsigned char>(cp[0]);
            if (std::isspace(c)) {
                flush();
                continue;
            }
            if (std::ispunct(c)) {
                flush();
                seq.tokens.emplace_back(cp);
                continue;
            }
        }
        current.append(cp);
    }
    flush();
    return seq;
}

namespace {

constexpr std::string_view kSiteHeader = "SITE:";
constexpr std::string_view kFindingsHeader = "FINDINGS:";
constexpr std::string_view kDiagnosisHeader = "DIAGNOSIS:";

bool is_header(std::string_view line, std::string_view& header, std::string_view& rest) {
    for (std::string_view h : {kSiteHeader, kFindingsHeader, kDiagnosisHeader}) {
        if (starts_with(line, h)) {
            header = h;
            rest = line.substr(h.size());
            return true;
        }
    }
    return false;
}

}  // namespace

ReportRecord parse_raw_report(std::string_view raw) {
    std::optional<std::string> site, findings, diagnosis;
    std::optional<std::string>* current = nullptr;
    std::string_view current_name;

    for (std::string_view line : split_on(raw, '\n')) {
        std::string_view header, rest;
        if (is_header(line, header, rest)) {
            std::optional<std::string>* slot =
                header == kSiteHeader ? &site : header == kFindingsHeader ? &findings : &diagnosis;
            if (slot->has_value()) throw DuplicateSection("duplicated section " + std::string(header));
            *slot = std::string(rest);
            current = slot;
            current_name = header;
        } else if (current != nullptr) {
            **current += '\n';
            **current += line;
        } else if (!is_blank(line)) {
            throw MissingSection("text before the first section header");
        }
    }

    if (!site) throw MissingSection("missing SITE section");
    if (!diagnosis) throw MissingSection("missing DIAGNOSIS section");

    auto finish = [](const std::optional<std::string>& body, std::string_view name) {
        std::string trimmed = trim(*body);
        if (trimmed.empty()) throw EmptyBody("empty body in section " + std::string(name));
        return trimmed;
    };

    ReportRecord rec;
    rec.site = finish(site, kSiteHeader);
    rec.diagnosis = finish(diagnosis, kDiagnosisHeader);
    if (findings) rec.findings = finish(findings, kFindingsHeader);
    rec.organ = infer_organ(rec.site);
    return rec;
}

std::string render_raw_report(const ReportRecord& rec) {
    std::string out;
    out += "SITE: ";
    out += rec.site;
    out += '\n';
    if (rec.findings) {
        out += "FINDINGS: ";
        out += *rec.findings;
        out += '\n';
    }
    out += "DIAGNOSIS: ";
    out += rec.diagnosis;
    out += '\n';
    return out;
}

const std::vector<double>* FeatureTable::find(std::string_view id) const {
    for (const auto& [rid, values] : rows)
        if (rid == id) return &values;
    return nullptr;
}

void FeatureTable::add(std::string id, std::vector<double> values) {
    rows.emplace_back(std::move(id), std::move(values));
}

namespace {

struct LesionClass {
    std::string name;
    std::string findings;
    std::string diagnosis;
};

struct OrganTable {
    Organ organ;
    double weight;
    std::vector<std::string> sites;
    std::vector<LesionClass> classes;
};

// The generator table: (organ, site, lesion class) triplets with findings and
// diagnosis templates keyed by lesion class. Sites are sampled independently
// of the lesion class, so the site alone never determines the diagnosis.
const std::vector<OrganTable>& generator_table() {
    static const std::vector<OrganTable> table = {
        {Organ::gastric,
         0.4,
         {"antrum", "fundus"},
         {{"gastritis", "mucosa with chronic inflammation", "benign gastritis"},
          {"low grade neoplasia", "glands with low grade dysplasia", "gastric neoplasia"},
          {"adenocarcinoma", "irregular glands with marked atypia", "gastric adenocarcinoma"}}},
        {Organ::intestinal,
         0.4,
         {"sigmoid", "ileum"},
         {{"colitis", "mucosa with active inflammation", "benign colitis"},
          {"tubular adenoma", "crowded glands with elongated nuclei", "tubular adenoma"},
          {"adenocarcinoma", "invasive glands with desmoplasia", "colonic adenocarcinoma"}}},
        {Organ::other,
         0.2,
         {"esophagus", "liver"},
         {{"benign", "tissue with no atypia", "benign lesion"},
          {"malignant", "tissue with malignant cells", "metastatic carcinoma"}}},
    };
    return table;
}

const OrganTable& table_for(Organ organ) {
    for (const auto& t : generator_table())
        if (t.organ == organ) return t;
    return generator_table().back();
}

}  // namespace

const std::vector<std::string>& synthetic_class_names(Organ organ) {
    static std::map<Organ, std::vector<std::string>> cache = [] {
        std::map<Organ, std::vector<std::string>> m;
        for (const auto& t : generator_table()) {
            std::vector<std::string> names;
            for (const auto& c : t.classes) names.push_back(c.name);
            m[t.organ] = std::move(names);
        }
        return m;
    }();
    return cache.at(organ);
}

const std::vector<std::string>& synthetic_sites(Organ organ) {
    return table_for(organ).sites;
}

SyntheticCorpus generate_synthetic_corpus(int n, std::uint64_t seed, const SyntheticConfig& config) {
    if (n < 1) throw InvalidCount("corpus size must be >= 1, got " + std::to_string(n));
    if (config.feature_dim < 1) throw InvalidCount("feature_dim must be >= 1");
    if (config.rois_per_record < 0) throw InvalidCount("rois_per_record must be >= 0");

    Rng rng(seed);
    SyntheticCorpus out;
    out.records.reserve(static_cast<std::size_t>(n));

    for (int i = 0; i < n; ++i) {
        // One draw sequence per record: organ, site, class, captionless, features.
        const double organ_draw = rng.uniform01();
        double acc = 0.0;
        const OrganTable* table = &generator_table().back();
        for (const auto& t : generator_table()) {
            acc += t.weight;
            if (organ_draw < acc) {
                table = &t;
                break;
            }
        }
        const auto site_idx = rng.below(table->sites.size());
        const auto class_idx = static_cast<int>(rng.below(table->classes.size()));
        const LesionClass& lesion = table->classes[static_cast<std::size_t>(class_idx)];

        ReportRecord rec;
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "r%06d", i + 1);
        rec.id = idbuf;
        rec.site = table->sites[site_idx];
        rec.organ = table->organ;
        rec.diagnosis = lesion.diagnosis;
        if (!rng.bernoulli(config.captionless_fraction)) rec.findings = lesion.findings;

        // Per-class Gaussian features: mean has class_mean_scale at dimensions
        // d with d % C == class index, unit variance everywhere.
        const int num_classes = static_cast<int>(table->classes.size());
        for (int k = 0; k < config.rois_per_record; ++k) {
            std::string fid = rec.id + "-roi" + std::to_string(k);
            std::vector<double> v(static_cast<std::size_t>(config.feature_dim));
            for (int d = 0; d < config.feature_dim; ++d) {
                const double mean = (d % num_classes == class_idx) ? config.class_mean_scale : 0.0;
                v[static_cast<std::size_t>(d)] = mean + rng.gaussian();
            }
            out.features.add(fid, std::move(v));
            if (rec.organ != Organ::other)
                out.labels.push_back({fid, rec.organ, class_idx});
            rec.feature_refs.push_back(std::move(fid));
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

CorpusSplit split_corpus(const std::vector<ReportRecord>& records, std::size_t sft_n,
                         std::size_t test_n, std::uint64_t seed) {
    std::size_t with_findings = 0;
    for (const auto& r : records)
        if (r.has_findings()) ++with_findings;
    if (with_findings < sft_n)
        throw InsufficientRecords("sft requires " + std::to_string(sft_n) +
                                  " findings-present records, corpus has " +
                                  std::to_string(with_findings));
    if (records.size() < sft_n + test_n)
        throw InsufficientRecords("corpus has " + std::to_string(records.size()) +
                                  " records, need " + std::to_string(sft_n + test_n));

    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    CorpusSplit split;
    std::vector<std::size_t> rest;
    for (std::size_t idx : order) {
        if (split.sft.size() < sft_n && records[idx].has_findings())
            split.sft.push_back(records[idx].id);
        else
            rest.push_back(idx);
    }
    // Test prefers findings-present records; fill from caption-less ones only
    // when there are not enough left.
    std::vector<std::size_t> leftovers;
    for (std::size_t idx : rest) {
        if (split.test.size() < test_n && records[idx].has_findings())
            split.test.push_back(records[idx].id);
        else
            leftovers.push_back(idx);
    }
    std::vector<std::size_t> grpo_idx;
    for (std::size_t idx : leftovers) {
        if (split.test.size() < test_n && !records[idx].has_findings())
            split.test.push_back(records[idx].id);
        else
            grpo_idx.push_back(idx);
    }
    for (std::size_t idx : grpo_idx) split.grpo.push_back(records[idx].id);
    return split;
}

std::string format_corpus_line(const ReportRecord& rec) {
    std::string line;
    line += "id=" + escape_field(rec.id);
    line += "\tsite=" + escape_field(rec.site);
    line += "\torgan=" + organ_name(rec.organ);
    std::string refs;
    for (std::size_t i = 0; i < rec.feature_refs.size(); ++i) {
        if (i) refs += ',';
        refs += rec.feature_refs[i];
    }
    line += "\tfeatures=" + escape_field(refs);
    if (rec.findings) line += "\tfindings=" + escape_field(*rec.findings);
    line += "\tdiagnosis=" + escape_field(rec.diagnosis);
    return line;
}

ReportRecord parse_corpus_line(std::string_view line, std::size_t line_no) {
    auto parts = split_on(line, '\t');
    // Fixed key order: id site organ features [findings] diagnosis.
    if (parts.size() != 5 && parts.size() != 6)
        throw MalformedLine(line_no, "expected 5 or 6 fields, got " + std::to_string(parts.size()));

    const bool has_findings = parts.size() == 6;
    const std::array<std::string_view, 6> expected = {"id", "site", "organ", "features",
                                                      has_findings ? "findings" : "diagnosis",
                                                      "diagnosis"};
    std::vector<std::string> values;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto eq = parts[i].find('=');
        if (eq == std::string_view::npos) throw MalformedLine(line_no, "field without '='");
        if (parts[i].substr(0, eq) != expected[i])
            throw MalformedLine(line_no, "expected key '" + std::string(expected[i]) + "', got '" +
                                             std::string(parts[i].substr(0, eq)) + "'");
        auto value = unescape_field(parts[i].substr(eq + 1));
        if (!value) throw MalformedLine(line_no, "bad escape sequence");
        values.push_back(std::move(*value));
    }

    ReportRecord rec;
    rec.id = values[0];
    rec.site = values[1];
    auto organ = organ_from_name(values[2]);
    if (!organ) throw MalformedLine(line_no, "unknown organ '" + values[2] + "'");
    rec.organ = *organ;
    for (auto ref : split_on(values[3], ','))
        if (!ref.empty()) rec.feature_refs.emplace_back(ref);
    if (has_findings) {
        if (trim(values[4]).empty()) throw MalformedLine(line_no, "empty findings");
        rec.findings = values[4];
    }
    rec.diagnosis = values.back();
    if (rec.id.empty()) throw MalformedLine(line_no, "empty id");
    if (trim(rec.diagnosis).empty()) throw MalformedLine(line_no, "empty diagnosis");
    return rec;
}

std::vector<ReportRecord> read_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open corpus file: " + path);
    std::vector<ReportRecord> records;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ReportRecord rec = parse_corpus_line(line, line_no);
        if (!seen.insert(rec.id).second)
            throw DuplicateId("duplicate record id '" + rec.id + "' at line " +
                              std::to_string(line_no));
        records.push_back(std::move(rec));
    }
    return records;
}

void write_corpus(const std::vector<ReportRecord>& records, const std::string& path) {
    std::set<std::string> seen;
    for (const auto& r : records)
        if (!seen.insert(r.id).second) throw DuplicateId("duplicate record id '" + r.id + "'");
    std::ofstream out(path);
    if (!out) throw CorpusError("cannot open corpus file for writing: " + path);
    for (const auto& r : records) out << format_corpus_line(r) << '\n';
}

FeatureTable read_features(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open feature file: " + path);
    FeatureTable table;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto parts = split_on(line, ' ');
        if (parts.size() < 2) throw MalformedLine(line_no, "expected id followed by floats");
        std::string id(parts[0]);
        if (!seen.insert(id).second)
            throw DuplicateId("duplicate feature id '" + id + "' at line " + std::to_string(line_no));
        std::vector<double> values;
        values.reserve(parts.size() - 1);
        for (std::size_t i = 1; i < parts.size(); ++i) {
            auto v = parse_double(parts[i]);
            if (!v) throw MalformedLine(line_no, "bad float '" + std::string(parts[i]) + "'");
            values.push_back(*v);
        }
        table.add(std::move(id), std::move(values));
    }
    return table;
}

void write_features(const FeatureTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CorpusError("cannot open feature file for writing: " + path);
    for (const auto& [id, values] : table.rows) {
        out << id;
        for (double v : values) out << ' ' << format_double(v);
        out << '\n';
    }
}

std::vector<RoiLabel> read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open label file: " + path);
    std::vector<RoiLabel> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto parts = split_on(line, '\t');
        if (parts.size() != 3) throw MalformedLine(line_no, "expected feature_id, organ, class");
        auto organ = organ_from_name(parts[1]);
        if (!organ) throw MalformedLine(line_no, "unknown organ '" + std::string(parts[1]) + "'");
        RoiLabel label;
        label.feature_id = std::string(parts[0]);
        label.organ = *organ;
        try {
            label.class_index = std::stoi(std::string(parts[2]));
        } catch (const std::exception&) {
            throw MalformedLine(line_no, "bad class index");
        }
        labels.push_back(std::move(label));
    }
    return labels;
}

void write_labels(const std::vector<RoiLabel>& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CorpusError("cannot open label file for writing: " + path);
    for (const auto& l : labels)
        out << l.feature_id << '\t' << organ_name(l.organ) << '\t' << l.class_index << '\n';
}

CorpusSplit read_split(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open split file: " + path);
    CorpusSplit split;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto parts = split_on(line, '\t');
        if (parts.size() != 2) throw MalformedLine(line_no, "expected '<part>\\t<id>'");
        if (parts[0] == "sft")
            split.sft.emplace_back(parts[1]);
        else if (parts[0] == "grpo")
            split.grpo.emplace_back(parts[1]);
        else if (parts[0] == "test")
            split.test.emplace_back(parts[1]);
        else
            throw MalformedLine(line_no, "unknown split part '" + std::string(parts[0]) + "'");
    }
    return split;
}

void write_split(const CorpusSplit& split, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CorpusError("cannot open split file for writing: " + path);
    for (const auto& id : split.sft) out << "sft\t" << id << '\n';
    for (const auto& id : split.grpo) out << "grpo\t" << id << '\n';
    for (const auto& id : split.test) out << "test\t" << id << '\n';
}

}  // namespace pathrl
