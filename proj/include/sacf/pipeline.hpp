#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sacf/expert.hpp"
#include "sacf/gate.hpp"
#include "sacf/metrics.hpp"

namespace sacf {

enum class EvalMode { Sacf, SacfOracle, AgnosticOnly, AwareOnly };

std::string to_string(EvalMode m);
EvalMode eval_mode_from_string(const std::string& s);

struct SacfModel {
    ExpertParams aware;
    ExpertParams agnostic;
    std::optional<GateParams> gate;  // absent for oracle / single-expert modes
    double tau = 0.5;
    AugConfig aug;

    void validate() const;
};

struct Prediction {
    std::string frame_id;
    Point point_px;       // routed prediction, pixel coordinates
    CellIndex cell;
    int c_coarse = 0;
    int c_fine = 0;       // 1 = Face, by the spatial check against face boxes
    double s = 0.0;
    ExpertKind routed_to = ExpertKind::Agnostic;
    Point aware_point_px;     // both experts' argmaxes, for scenario analysis
    Point agnostic_point_px;

    std::string to_jsonl() const;
    static Prediction from_json_line(const std::string& line, int line_no);
};

// Routed inference for one frame. `mode` fixes the routing source: the learned
// gate, the oracle, or a single expert.
Prediction predict(const SacfModel& model, const Annotation& ann, EvalMode mode);

struct EvalOutput {
    EvalReport report;
    std::vector<Prediction> predictions;
};

EvalOutput evaluate(const SacfModel& model, EvalMode mode,
                    const std::vector<const Annotation*>& frames, int threads = 1);

// Four-bucket breakdown keyed by (coarse routing, ground-truth binary label)
// with per-expert mean L2 per bucket.
struct ScenarioRow {
    std::string name;
    int pred_face = 0;
    int gt_face = 0;
    int count = 0;
    std::optional<double> aware_l2;
    std::optional<double> agnostic_l2;
};

std::vector<ScenarioRow> scenario_analysis(const std::vector<Prediction>& predictions,
                                           const std::vector<const Annotation*>& frames);

std::string scenario_csv(const std::vector<ScenarioRow>& rows);

}  // namespace sacf
