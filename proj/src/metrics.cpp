#include "isbp/metrics.hpp"

#include "isbp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace isbp {
namespace {

struct Ratio {
    double value;
    bool undefined;
};

Ratio ratio(double num, double den) {
    if (den == 0.0) return {0.0, true};
    return {num / den, false};
}

} // namespace

ConfusionMatrix::ConfusionMatrix(int num_classes) : n_(num_classes) {
    if (num_classes < 1) {
        throw ConfigError("confusion matrix needs at least one class");
    }
    counts_.assign(static_cast<std::size_t>(n_) * n_, 0);
}

std::size_t ConfusionMatrix::index(int truth, int pred) const {
    if (truth < 1 || truth > n_ || pred < 1 || pred > n_) {
        throw std::out_of_range("confusion matrix label out of range");
    }
    return static_cast<std::size_t>(truth - 1) * n_ + (pred - 1);
}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t t = 0;
    for (int g = 1; g <= n_; ++g) t += at(g, g);
    return t;
}

std::uint64_t ConfusionMatrix::row_sum(int truth) const {
    std::uint64_t s = 0;
    for (int j = 1; j <= n_; ++j) s += at(truth, j);
    return s;
}

std::uint64_t ConfusionMatrix::col_sum(int pred) const {
    std::uint64_t s = 0;
    for (int i = 1; i <= n_; ++i) s += at(i, pred);
    return s;
}

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> truth, int num_classes) {
    if (preds.size() != truth.size()) {
        throw InputError("prediction and truth lengths differ", std::min(preds.size(), truth.size()));
    }
    ConfusionMatrix cm(num_classes);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] < 1 || preds[i] > num_classes || truth[i] < 1 || truth[i] > num_classes) {
            throw InputError("label out of range 1.." + std::to_string(num_classes), i);
        }
        ++cm.at(truth[i], preds[i]);
    }
    return cm;
}

MetricReport prf1(const ConfusionMatrix& cm) {
    MetricReport r;
    double f1_sum = 0.0;
    double recall_sum = 0.0;
    for (int g = 1; g <= cm.classes(); ++g) {
        const auto tp = static_cast<double>(cm.at(g, g));
        const auto predicted = static_cast<double>(cm.col_sum(g));
        const auto actual = static_cast<double>(cm.row_sum(g));
        ClassMetrics m;
        m.label = g;
        m.support = cm.row_sum(g);
        const auto p = ratio(tp, predicted);
        const auto rc = ratio(tp, actual);
        const auto f = ratio(2.0 * p.value * rc.value, p.value + rc.value);
        m.precision = p.value;
        m.precision_undefined = p.undefined;
        m.recall = rc.value;
        m.recall_undefined = rc.undefined;
        m.f1 = f.value;
        m.f1_undefined = f.undefined;
        f1_sum += m.f1;
        recall_sum += m.recall;
        r.per_class.push_back(m);
    }
    r.macro_f1 = f1_sum / cm.classes();
    r.mean_recall = recall_sum / cm.classes();
    const auto acc = ratio(static_cast<double>(cm.trace()), static_cast<double>(cm.total()));
    r.average_accuracy = acc.value;
    r.accuracy_undefined = acc.undefined;
    return r;
}

RocCurve roc_auc(std::span<const double> scores, const std::vector<bool>& is_known) {
    if (scores.size() != is_known.size()) {
        throw InputError("score and label lengths differ", std::min(scores.size(), is_known.size()));
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) throw InputError("non-finite score", i);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    const auto positives = static_cast<double>(std::count(is_known.begin(), is_known.end(), true));
    const auto negatives = static_cast<double>(is_known.size()) - positives;
    if (positives == 0.0 || negatives == 0.0) {
        throw InputError("ROC needs both known and unknown samples", 0);
    }

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    double tp = 0.0;
    double fp = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        const double threshold = scores[order[i]];
        for (; i < order.size() && scores[order[i]] == threshold; ++i) {
            (is_known[order[i]] ? tp : fp) += 1.0;
        }
        const RocPoint prev = curve.points.back();
        const RocPoint pt{threshold, fp / negatives, tp / positives};
        curve.auc += 0.5 * (pt.fpr - prev.fpr) * (pt.tpr + prev.tpr);
        curve.points.push_back(pt);
    }
    return curve;
}

double Prediction::max_confidence() const {
    if (confidence.empty()) return 0.0;
    return *std::max_element(confidence.begin(), confidence.end());
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open predictions " + path.string(), 0);
    }
    std::vector<Prediction> out;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            Prediction p;
            p.sample_id = j.at("sample_id").get<std::uint64_t>();
            p.predicted_label = j.at("predicted_label").get<int>();
            p.confidence = j.value("confidence", std::vector<double>{});
            out.push_back(std::move(p));
        } catch (const nlohmann::json::exception& e) {
            throw InputError(std::string("malformed prediction record: ") + e.what(), lineno);
        }
    }
    return out;
}

nlohmann::json prediction_to_json(const Prediction& p) {
    return {{"sample_id", p.sample_id}, {"predicted_label", p.predicted_label}, {"confidence", p.confidence}};
}

nlohmann::json report_to_json(const MetricReport& r, const ConfusionMatrix& cm) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& m : r.per_class) {
        classes.push_back({{"label", m.label},
                           {"precision", m.precision},
                           {"recall", m.recall},
                           {"f1", m.f1},
                           {"support", m.support},
                           {"precision_undefined", m.precision_undefined},
                           {"recall_undefined", m.recall_undefined},
                           {"f1_undefined", m.f1_undefined}});
    }
    nlohmann::json matrix = nlohmann::json::array();
    for (int i = 1; i <= cm.classes(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 1; j <= cm.classes(); ++j) row.push_back(cm.at(i, j));
        matrix.push_back(row);
    }
    nlohmann::json j = {{"per_class", classes},
                        {"macro_f1", r.macro_f1},
                        {"average_accuracy", r.average_accuracy},
                        {"mean_recall", r.mean_recall},
                        {"accuracy_undefined", r.accuracy_undefined},
                        {"confusion", matrix}};
    if (r.roc) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : r.roc->points) {
            // JSON has no infinity; the opening point is reported with a null threshold.
            pts.push_back({{"threshold", std::isfinite(p.threshold) ? nlohmann::json(p.threshold) : nlohmann::json()},
                           {"fpr", p.fpr},
                           {"tpr", p.tpr}});
        }
        j["roc"] = {{"auc", r.roc->auc}, {"points", pts}};
    }
    return j;
}

std::string format_report(const MetricReport& r) {
    std::string out;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-7s %9s %9s %9s %9s\n", "class", "precision", "recall", "f1", "support");
    out += buf;
    for (const auto& m : r.per_class) {
        std::snprintf(buf, sizeof buf, "%-7d %9.4f %9.4f %9.4f %9llu%s\n", m.label, m.precision, m.recall, m.f1,
                      static_cast<unsigned long long>(m.support),
                      (m.precision_undefined || m.recall_undefined || m.f1_undefined) ? "  *" : "");
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "%-17s %9.4f\n", "macro_f1", r.macro_f1);
    out += buf;
    std::snprintf(buf, sizeof buf, "%-17s %9.4f\n", "average_accuracy", r.average_accuracy);
    out += buf;
    std::snprintf(buf, sizeof buf, "%-17s %9.4f\n", "mean_recall", r.mean_recall);
    out += buf;
    if (r.roc) {
        std::snprintf(buf, sizeof buf, "%-17s %9.4f\n", "auc", r.roc->auc);
        out += buf;
    }
    return out;
}

} // namespace isbp
