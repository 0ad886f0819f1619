#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>

#include "sacf/scene.hpp"

namespace sacf {

// Scene generator configuration. Coordinates are pixels; the feature grid is
// grid_h x grid_w with a fixed cell size of kCellPx pixels per axis.
struct GenConfig {
    int grid_h = 32;
    int grid_w = 32;
    int feature_dim = 6;
    int n_frames = 16582;
    std::array<double, 3> split_fractions = {9874.0 / 16582.0, 3344.0 / 16582.0,
                                             3364.0 / 16582.0};
    // Probabilities over {Face, Object, PersonNonFace}.
    double prior_face = 0.066;
    double prior_object = 0.85;
    double prior_pnf = 0.084;
    int n_faces_min = 1, n_faces_max = 2;
    int n_objects_min = 1, n_objects_max = 4;
    int n_pnf_min = 1, n_pnf_max = 2;
    double gaze_noise_sigma = 0.35;  // radians
    double jitter_sigma = 0.75;      // cells
    double noninclusive_prob = 0.0;
    std::uint64_t seed = 20240817;

    void validate() const;
    int frame_width() const;
    int frame_height() const;

    std::string to_json() const;
    static GenConfig from_json(const std::string& text);
    std::string hash() const;  // FNV-1a over the canonical JSON form
};

// One synthetic frame, a pure function of (cfg, frame_index). The returned
// annotation carries its SceneFeatures inline.
Annotation sample_scene(const GenConfig& cfg, std::uint64_t frame_index);

// n_frames scenes with deterministic split assignment. Identical cfg yields a
// byte-identical serialized dataset.
Dataset make_dataset(const GenConfig& cfg, int threads = 1);

// Split sizes: round for train and val, remainder for test.
std::array<int, 3> split_sizes(int n_frames, const std::array<double, 3>& fractions);

}  // namespace sacf
