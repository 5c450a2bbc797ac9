#include "detmet/types.hpp"

namespace detmet {

LabelMatrix LabelMatrix::from_labels(LabelStorage labels, std::vector<std::string> detector_names,
                                     std::vector<std::string> file_ids) {
    LabelMatrix matrix;
    matrix.labels = std::move(labels);
    const auto n = matrix.labels.cols();
    const auto m = matrix.labels.rows();
    if (detector_names.empty()) {
        detector_names.reserve(static_cast<std::size_t>(n));
        for (Eigen::Index j = 0; j < n; ++j) detector_names.push_back("det" + std::to_string(j + 1));
    }
    if (file_ids.empty()) {
        file_ids.reserve(static_cast<std::size_t>(m));
        for (Eigen::Index i = 0; i < m; ++i) file_ids.push_back("f" + std::to_string(i + 1));
    }
    matrix.detector_names = std::move(detector_names);
    matrix.file_ids = std::move(file_ids);
    matrix.validate();
    return matrix;
}

void LabelMatrix::validate() const {
    if (labels.rows() < 1 || labels.cols() < 1)
        throw InvalidInput("label matrix needs at least one file and one detector");
    if (static_cast<Eigen::Index>(detector_names.size()) != labels.cols())
        throw InvalidInput("detector name count does not match column count");
    if (static_cast<Eigen::Index>(file_ids.size()) != labels.rows())
        throw InvalidInput("file id count does not match row count");
    for (Eigen::Index j = 0; j < labels.cols(); ++j)
        for (Eigen::Index i = 0; i < labels.rows(); ++i)
            if (labels(i, j) > 1)
                throw InvalidInput("label cell outside {0,1} at row " + std::to_string(i) +
                                   ", column " + std::to_string(j));
}

LabelMatrix LabelMatrix::select_detectors(const std::vector<int>& detector_indices) const {
    if (detector_indices.empty()) throw InvalidInput("detector selection is empty");
    LabelMatrix out;
    out.labels.resize(labels.rows(), static_cast<Eigen::Index>(detector_indices.size()));
    out.detector_names.reserve(detector_indices.size());
    Eigen::Index col = 0;
    for (int idx : detector_indices) {
        if (idx < 0 || idx >= labels.cols())
            throw InvalidInput("detector index out of range: " + std::to_string(idx));
        out.labels.col(col++) = labels.col(idx);
        out.detector_names.push_back(detector_names[static_cast<std::size_t>(idx)]);
    }
    out.file_ids = file_ids;
    return out;
}

std::int64_t GroundTruth::malicious_count() const {
    std::int64_t m1 = 0;
    for (Eigen::Index i = 0; i < truth.size(); ++i) m1 += truth[i];
    return m1;
}

std::int64_t GroundTruth::benign_count() const { return truth.size() - malicious_count(); }

double GroundTruth::malicious_fraction() const {
    return static_cast<double>(malicious_count()) / static_cast<double>(truth.size());
}

void GroundTruth::validate() const {
    if (truth.size() < 1) throw InvalidInput("ground truth is empty");
    for (Eigen::Index i = 0; i < truth.size(); ++i)
        if (truth[i] > 1) throw InvalidInput("truth value outside {0,1}");
}

const char* to_string(EstimateKind kind) {
    switch (kind) {
        case EstimateKind::Naive: return "naive";
        case EstimateKind::Adjusted: return "adjusted";
        case EstimateKind::TrueParams: return "true";
    }
    return "?";
}

bool MetricEstimates::all_fp_available() const {
    for (const auto& e : fp)
        if (!e.available) return false;
    return true;
}

bool MetricEstimates::all_fn_available() const {
    for (const auto& e : fn)
        if (!e.available) return false;
    return true;
}

double DetectorProfile::ppv(double pi1) const {
    const double num = pi1 * (1.0 - fn);
    const double den = num + (1.0 - pi1) * fp;
    return den == 0.0 ? std::numeric_limits<double>::quiet_NaN() : num / den;
}

double DetectorProfile::npv(double pi1) const {
    const double num = (1.0 - pi1) * (1.0 - fp);
    const double den = num + pi1 * fn;
    return den == 0.0 ? std::numeric_limits<double>::quiet_NaN() : num / den;
}

Eigen::ArrayXd fp_rates(const std::vector<DetectorProfile>& profiles) {
    Eigen::ArrayXd out(static_cast<Eigen::Index>(profiles.size()));
    for (std::size_t j = 0; j < profiles.size(); ++j) out[static_cast<Eigen::Index>(j)] = profiles[j].fp;
    return out;
}

Eigen::ArrayXd fn_rates(const std::vector<DetectorProfile>& profiles) {
    Eigen::ArrayXd out(static_cast<Eigen::Index>(profiles.size()));
    for (std::size_t j = 0; j < profiles.size(); ++j) out[static_cast<Eigen::Index>(j)] = profiles[j].fn;
    return out;
}

MetricEstimates true_metric_set(const std::vector<DetectorProfile>& profiles, double pi1) {
    MetricEstimates out;
    out.kind = EstimateKind::TrueParams;
    out.pi1 = Estimate::of(pi1);
    out.fp.reserve(profiles.size());
    out.fn.reserve(profiles.size());
    out.ppv.reserve(profiles.size());
    out.npv.reserve(profiles.size());
    for (const auto& p : profiles) {
        out.fp.push_back(Estimate::of(p.fp));
        out.fn.push_back(Estimate::of(p.fn));
        const double q_plus = p.ppv(pi1);
        const double q_minus = p.npv(pi1);
        out.ppv.push_back(std::isnan(q_plus) ? Estimate::unavailable() : Estimate::of(q_plus));
        out.npv.push_back(std::isnan(q_minus) ? Estimate::unavailable() : Estimate::of(q_minus));
    }
    return out;
}

}  // namespace detmet
