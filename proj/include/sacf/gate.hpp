#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sacf/scene.hpp"

namespace sacf {

inline constexpr int kPooledDim = 6;

struct GateMeta {
    std::uint64_t seed = 0;
    int epochs = 0;
    double learning_rate = 0.0;
    double class_weight = 0.0;
};

// Pooled logistic scorer for the coarse face/not-face routing decision.
struct GateParams {
    std::array<double, kPooledDim> v{};
    double c = 0.0;
    GateMeta meta;

    std::string to_json() const;
    static GateParams from_json(const std::string& text);
};

struct GateDecision {
    double s = 0.0;
    double tau = 0.5;
    int c_coarse = 0;  // 1 iff s >= tau
};

// [mean face alignment, max face alignment, mean object alignment,
//  max object alignment, face-cell fraction, global max alignment].
// Empty cell sets contribute 0 for means and -1 for maxima.
std::array<double, kPooledDim> pool_features(const SceneFeatures& features);

double gate_score(const GateParams& params, const SceneFeatures& features);

inline int coarse_classify(double s, double tau) { return s >= tau ? 1 : 0; }

struct GateHyper {
    int epochs = 300;
    double learning_rate = 0.3;
    double class_weight = 0.0;  // <= 0: inverse positive prevalence of the split
    std::uint64_t seed = 0;
};

struct TrainedGate {
    GateParams params;
    std::vector<double> epoch_losses;
};

// Class-weighted logistic regression over pooled features against the binary
// target label. Throws on a single-class split.
TrainedGate train_gate(const std::vector<const Annotation*>& train, const GateHyper& hyper);

inline int oracle_gate(const Annotation& a) { return binary_label(a.target_category); }

}  // namespace sacf
