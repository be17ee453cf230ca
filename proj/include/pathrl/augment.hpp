#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathrl/corpus.hpp"
#include "pathrl/errors.hpp"

namespace pathrl {

struct AugmentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingleClass : AugmentError {
    using AugmentError::AugmentError;
};
struct MissingPrediction : AugmentError {
    using AugmentError::AugmentError;
};
struct UnexpectedPrediction : AugmentError {
    using AugmentError::AugmentError;
};

// Per-organ linear classification head over frozen feature vectors.
// weights is D x C row-major (row d holds the weights of feature dimension d
// across the C classes).
struct ClassifierHead {
    Organ organ = Organ::gastric;
    int feature_dim = 1536;  // D
    std::vector<std::string> class_names;
    std::vector<double> weights;  // D * C
    std::vector<double> bias;     // C

    int num_classes() const { return static_cast<int>(class_names.size()); }
    void validate() const;
};

struct HeadTrainConfig {
    double lr = 0.1;
    int epochs = 200;
    std::uint64_t seed = 0;
};

struct LabeledFeature {
    std::vector<double> values;
    int class_index = 0;
};

struct HeadTrainResult {
    ClassifierHead head;
    double final_loss = 0.0;
    double train_accuracy = 0.0;
    std::vector<double> loss_per_epoch;
};

// Full-batch gradient descent on the multinomial logistic loss from
// zero-initialized weights. class_names supplies C and the label namespace;
// every example's class_index must be within it.
HeadTrainResult train_head(const std::vector<LabeledFeature>& data, Organ organ,
                           const std::vector<std::string>& class_names,
                           const HeadTrainConfig& config = {});

struct RoiPrediction {
    std::string label;
    double confidence = 0.0;
    int class_index = 0;
};

// softmax(W^T x + b); argmax with ties broken toward the lowest class index.
RoiPrediction predict_roi(const ClassifierHead& head, const std::vector<double>& feature);

// Full class probability vector, same ordering as head.class_names.
std::vector<double> class_probabilities(const ClassifierHead& head,
                                        const std::vector<double>& feature);

struct AugmentedPrompt {
    std::string text;
    std::string site;
    std::optional<std::string> aux_label;
    std::optional<double> aux_confidence;
};

struct PromptTemplate {
    std::string base_request =
        "Describe the microscopic findings and give the pathological diagnosis.";
};

// "Site: {site}. Classifier: {label} (confidence {c:.2f}). {base_request}"
// when a prediction is given, "Site: {site}. {base_request}" otherwise.
std::string render_prompt_text(std::string_view site,
                               const std::optional<RoiPrediction>& prediction,
                               const PromptTemplate& tmpl);

// Strict per-record prompt construction: gastric and intestinal records must
// come with a prediction, "other" records must not.
AugmentedPrompt build_prompt(const ReportRecord& record,
                             const std::optional<RoiPrediction>& prediction,
                             const PromptTemplate& tmpl = {});

// The paper-reported taxonomies, shipped as default class-name lists only.
const std::vector<std::string>& default_gastric_classes();   // 11 classes
const std::vector<std::string>& default_intestinal_classes();  // 4 classes

ClassifierHead read_head(const std::string& path);
void write_head(const ClassifierHead& head, const std::string& path);

}  // namespace pathrl
