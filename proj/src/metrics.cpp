#include "irdrop/metrics.hpp"

#include <cmath>
#include <sstream>

#include "irdrop/errors.hpp"

namespace irdrop {

namespace {

void require_same_shape(const FeatureMap& a, const FeatureMap& b) {
    if (a.h != b.h || a.w != b.w)
        throw ShapeError("metric maps differ in shape: " + std::to_string(a.h) + "x" +
                         std::to_string(a.w) + " vs " + std::to_string(b.h) + "x" +
                         std::to_string(b.w));
}

}  // namespace

double mae_mv(const FeatureMap& pred, const FeatureMap& truth) {
    require_same_shape(pred, truth);
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) sum += std::abs(truth.data[i] - pred.data[i]);
    return sum / static_cast<double>(truth.size()) * 1000.0;
}

F1Result f1_worst_case(const FeatureMap& pred, const FeatureMap& truth) {
    require_same_shape(pred, truth);
    double max_truth = 0.0;
    for (double v : truth.data) max_truth = std::max(max_truth, v);
    if (!(max_truth > 0.0))
        throw ShapeError("f1_worst_case: ground truth maximum is not positive");

    F1Result r;
    r.threshold = 0.9 * max_truth;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool pos_truth = truth.data[i] > r.threshold;
        const bool pos_pred = pred.data[i] > r.threshold;
        if (pos_truth && pos_pred)
            ++r.tp;
        else if (!pos_truth && pos_pred)
            ++r.fp;
        else if (pos_truth && !pos_pred)
            ++r.fn;
        else
            ++r.tn;
    }
    if (r.tp > 0) {
        r.precision = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
        r.recall = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    }
    return r;
}

WorstCaseErrors worst_case_errors(const FeatureMap& pred, const FeatureMap& truth) {
    require_same_shape(pred, truth);
    WorstCaseErrors out;
    std::size_t argmax = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth.data[i] > truth.data[argmax]) argmax = i;  // strict: ties keep the first
        out.max_ir_error = std::max(out.max_ir_error, std::abs(truth.data[i] - pred.data[i]));
    }
    out.w_ir = truth.data[argmax];
    out.w_ir_error = std::abs(truth.data[argmax] - pred.data[argmax]);
    return out;
}

EvalReport evaluate(const FeatureMap& pred, const FeatureMap& truth) {
    EvalReport r;
    r.mae_mv = mae_mv(pred, truth);
    F1Result f1 = f1_worst_case(pred, truth);
    r.f1 = f1.f1;
    r.precision = f1.precision;
    r.recall = f1.recall;
    r.threshold_mv = f1.threshold * 1000.0;
    r.tp = f1.tp;
    r.fp = f1.fp;
    r.fn = f1.fn;
    r.tn = f1.tn;
    WorstCaseErrors wc = worst_case_errors(pred, truth);
    r.w_ir_mv = wc.w_ir * 1000.0;
    r.w_ir_error_mv = wc.w_ir_error * 1000.0;
    r.w_ir_error_pct = wc.w_ir > 0.0 ? wc.w_ir_error / wc.w_ir * 100.0 : 0.0;
    r.max_ir_error_mv = wc.max_ir_error * 1000.0;
    return r;
}

std::string EvalReport::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"mae_mv\":" << mae_mv << ",\"f1\":" << f1 << ",\"precision\":" << precision
       << ",\"recall\":" << recall << ",\"threshold_mv\":" << threshold_mv
       << ",\"w_ir_mv\":" << w_ir_mv << ",\"w_ir_error_mv\":" << w_ir_error_mv
       << ",\"w_ir_error_pct\":" << w_ir_error_pct << ",\"max_ir_error_mv\":" << max_ir_error_mv
       << ",\"tp\":" << tp << ",\"fp\":" << fp << ",\"fn\":" << fn << ",\"tn\":" << tn << "}";
    return os.str();
}

}  // namespace irdrop
