#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sacf/heatmap.hpp"
#include "sacf/scene.hpp"

namespace sacf {

enum class ExpertKind { Aware, Agnostic };

std::string to_string(ExpertKind k);
ExpertKind expert_kind_from_string(const std::string& s);

struct ExpertMeta {
    int grid_h = 0;
    int grid_w = 0;
    int feature_dim = 0;
    std::uint64_t seed = 0;
    int epochs = 0;
    double learning_rate = 0.0;
};

// Per-cell logistic heatmap predictor: p(i,j) = sigmoid(w . f(i,j) + b).
struct ExpertParams {
    ExpertKind kind = ExpertKind::Agnostic;
    std::vector<double> w;
    double b = 0.0;
    ExpertMeta meta;

    std::string to_json() const;
    static ExpertParams from_json(const std::string& text);
};

// Blur-augmentation parameters: attenuation of non-kept context channels plus
// a box smoothing of the attenuated gaze-alignment channel.
struct AugConfig {
    double beta = 0.1;     // attenuation in [0,1]
    int keep_radius = 3;   // cells, training-time disk around the known target
    int blur_kernel = 3;   // odd box-filter width

    void validate() const;
};

Heatmap predict_heatmap(const ExpertParams& params, const SceneFeatures& features);
Grid predict_logits(const ExpertParams& params, const SceneFeatures& features);

// Attenuates {object_mask, pnf_mask, gaze_alignment} outside the keep region
// (union of face boxes, plus a disk of keep_radius cells around keep_center
// when given) and box-smooths the attenuated alignment there. Face, head and
// distance channels pass through unchanged.
SceneFeatures aug_social(const SceneFeatures& features, const std::vector<BBox>& faces,
                         const std::optional<Point>& keep_center, const AugConfig& cfg);

struct ExpertHyper {
    int epochs = 200;
    double learning_rate = 0.5;
    int batch_size = 0;  // 0 = full batch
    std::uint64_t seed = 0;
    double heatmap_sigma = 2.0;  // cells
};

struct TrainedExpert {
    ExpertParams params;
    std::vector<double> epoch_losses;
};

// Deterministic gradient descent on mean BCE between the predicted heatmap and
// the Gaussian ground truth. Aware experts train on blur-augmented features
// with the ground-truth target as keep center; agnostic experts train on raw
// features.
TrainedExpert train_expert(const std::vector<const Annotation*>& train, ExpertKind kind,
                           const ExpertHyper& hyper, const AugConfig& aug, int threads = 1);

// Continuous cell coordinates of a pixel point (integer values are cell
// centers), for ground-truth heatmap construction.
inline Point pixel_to_cell(const Point& px) {
    return {px.x / kCellPx - 0.5, px.y / kCellPx - 0.5};
}

// Pixel coordinates of a cell center.
inline Point cell_to_pixel(const CellIndex& c) {
    return {(c.col + 0.5) * kCellPx, (c.row + 0.5) * kCellPx};
}

}  // namespace sacf
