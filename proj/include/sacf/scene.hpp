#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sacf/geometry.hpp"

namespace sacf {

// Fixed pixel size of one feature-grid cell per axis.
inline constexpr int kCellPx = 8;

enum class Category { Object, Face, PersonNonFace, Noninclusive };

std::string to_string(Category c);
Category category_from_string(const std::string& s);

// Face -> 1, Object/PersonNonFace -> 0. Noninclusive has no binary
// projection and must be filtered before evaluation.
inline int binary_label(Category c) {
    switch (c) {
        case Category::Face: return 1;
        case Category::Object:
        case Category::PersonNonFace: return 0;
        default: throw std::invalid_argument("binary_label: Noninclusive has no binary projection");
    }
}

enum class Split { Train, Val, Test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

// Dense grid_h x grid_w x F feature grid standing in for the image.
// Channel layout: [face_mask, object_mask, pnf_mask, head_mask,
// gaze_alignment, head_distance].
struct SceneFeatures {
    static constexpr int kFaceMask = 0;
    static constexpr int kObjectMask = 1;
    static constexpr int kPnfMask = 2;
    static constexpr int kHeadMask = 3;
    static constexpr int kGazeAlignment = 4;
    static constexpr int kHeadDistance = 5;

    int grid_h = 0;
    int grid_w = 0;
    int feature_dim = 0;
    std::vector<float> data;  // row-major, cell-major then channel

    SceneFeatures() = default;
    SceneFeatures(int h, int w, int f)
        : grid_h(h), grid_w(w), feature_dim(f),
          data(static_cast<std::size_t>(h) * w * f, 0.0f) {}

    float& at(int i, int j, int c) {
        return data[(static_cast<std::size_t>(i) * grid_w + j) * feature_dim + c];
    }
    float at(int i, int j, int c) const {
        return data[(static_cast<std::size_t>(i) * grid_w + j) * feature_dim + c];
    }
    const float* cell(int i, int j) const {
        return data.data() + (static_cast<std::size_t>(i) * grid_w + j) * feature_dim;
    }
    int n_cells() const { return grid_h * grid_w; }

    bool operator==(const SceneFeatures&) const = default;
};

// One frame's geometry and label.
struct Annotation {
    std::string frame_id;
    std::string clip_id;
    int width = 0;
    int height = 0;
    BBox child_head;
    std::vector<BBox> adult_faces;
    Point target_point;
    std::optional<BBox> target_box;
    Category target_category = Category::Object;
    Split split = Split::Train;
    std::optional<SceneFeatures> features;

    // Throws std::invalid_argument naming the violated invariant.
    void validate() const;
};

struct DatasetMetadata {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::map<std::string, int> split_counts;     // keyed by split name
    std::map<std::string, int> category_counts;  // keyed by category name
};

struct Dataset {
    std::vector<Annotation> annotations;
    DatasetMetadata metadata;

    // frame_id uniqueness plus per-record invariants; optionally checks that
    // metadata counts match recomputed counts.
    void validate(bool check_metadata_counts = true) const;

    std::vector<const Annotation*> split_view(Split s) const;
    DatasetMetadata recount(std::string config_hash = {}, std::uint64_t seed = 0) const;
};

}  // namespace sacf
