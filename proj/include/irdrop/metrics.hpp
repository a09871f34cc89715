#pragma once

#include <cstdint>
#include <string>

#include "irdrop/feature_map.hpp"

namespace irdrop {

// Contest metrics over a predicted and a ground-truth IR-drop map. Maps are
// in volts internally; every reported figure is in mV.
struct EvalReport {
    double mae_mv = 0.0;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double threshold_mv = 0.0;  // 0.9 * max(truth)
    double w_ir_mv = 0.0;       // worst-case ground-truth drop
    double w_ir_error_mv = 0.0; // |truth - pred| at the truth argmax
    double w_ir_error_pct = 0.0;  // w_ir_error / w_ir * 100
    double max_ir_error_mv = 0.0;
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::string to_json() const;
};

double mae_mv(const FeatureMap& pred, const FeatureMap& truth);

struct F1Result {
    double f1 = 0.0, precision = 0.0, recall = 0.0;
    double threshold = 0.0;  // volts
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Cells exceeding 0.9 * max(truth) are positive; the same truth-derived
// threshold labels both maps. F1 (and P, R) are 0 when TP = 0.
F1Result f1_worst_case(const FeatureMap& pred, const FeatureMap& truth);

struct WorstCaseErrors {
    double w_ir = 0.0;          // volts
    double w_ir_error = 0.0;    // volts, at the first row-major truth argmax
    double max_ir_error = 0.0;  // volts
};

WorstCaseErrors worst_case_errors(const FeatureMap& pred, const FeatureMap& truth);

EvalReport evaluate(const FeatureMap& pred, const FeatureMap& truth);

}  // namespace irdrop
