#pragma once

// Classification metrics: confusion matrix, per-class precision / recall /
// F1, macro F1, average accuracy and the open-set ROC.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace isbp {

class ConfusionMatrix {
public:
    /// Classes are labelled 1..num_classes.
    explicit ConfusionMatrix(int num_classes);

    int classes() const { return n_; }
    std::uint64_t& at(int truth, int pred) { return counts_[index(truth, pred)]; }
    std::uint64_t at(int truth, int pred) const { return counts_[index(truth, pred)]; }

    std::uint64_t total() const;
    std::uint64_t trace() const;
    std::uint64_t row_sum(int truth) const;
    std::uint64_t col_sum(int pred) const;

    bool operator==(const ConfusionMatrix&) const = default;

private:
    std::size_t index(int truth, int pred) const;

    int n_;
    std::vector<std::uint64_t> counts_;
};

/// Entry (i, j) counts samples of truth i predicted as j. Throws InputError
/// on a length mismatch or a label outside 1..num_classes.
ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> truth, int num_classes);

struct ClassMetrics {
    int label = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;
    bool precision_undefined = false; ///< no predictions of this class
    bool recall_undefined = false;    ///< no samples of this class
    bool f1_undefined = false;        ///< P + R = 0
};

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;
    double auc = 0.0;
};

struct MetricReport {
    std::vector<ClassMetrics> per_class;
    double macro_f1 = 0.0;
    double average_accuracy = 0.0; ///< trace / total
    double mean_recall = 0.0;      ///< alternative reading of average accuracy
    bool accuracy_undefined = false;
    std::optional<RocCurve> roc;
};

/// Undefined ratios are reported as 0 and flagged.
MetricReport prf1(const ConfusionMatrix& cm);

/// ROC for "known" as the positive class, sweeping thresholds over the unique
/// scores (score >= threshold is accepted as known). Tied scores enter
/// together, so the curve is order independent. Throws InputError on a
/// length mismatch, non-finite score, or single-class input.
RocCurve roc_auc(std::span<const double> scores, const std::vector<bool>& is_known);

struct Prediction {
    std::uint64_t sample_id = 0;
    int predicted_label = 0;
    std::vector<double> confidence; ///< one entry per class, label order

    double max_confidence() const;
};

/// Line-JSON predictions: {"sample_id": u64, "predicted_label": int, "confidence": [...]}
/// per line; blank lines are skipped. Throws InputError naming the line.
std::vector<Prediction> read_predictions(const std::filesystem::path& path);
nlohmann::json prediction_to_json(const Prediction& p);

nlohmann::json report_to_json(const MetricReport& r, const ConfusionMatrix& cm);

/// Aligned plain-text table of the per-class metrics and summary rows.
std::string format_report(const MetricReport& r);

} // namespace isbp
