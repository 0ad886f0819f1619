#pragma once

#include <vector>

#include "sacf/geometry.hpp"

namespace sacf {

// Numerics note: probabilities are clamped to [kBceEps, 1 - kBceEps] inside
// the loss so it stays finite for saturated predictions.
inline constexpr double kBceEps = 1e-6;

struct CellIndex {
    int row = 0;
    int col = 0;
    bool operator==(const CellIndex&) const = default;
};

// Dense grid of per-cell values. Doubles throughout; predicted heatmaps keep
// values in [0,1], logit grids are unbounded.
struct Grid {
    int h = 0;
    int w = 0;
    std::vector<double> v;

    Grid() = default;
    Grid(int h_, int w_, double fill = 0.0)
        : h(h_), w(w_), v(static_cast<std::size_t>(h_) * w_, fill) {}

    double& at(int i, int j) { return v[static_cast<std::size_t>(i) * w + j]; }
    double at(int i, int j) const { return v[static_cast<std::size_t>(i) * w + j]; }
    int size() const { return h * w; }
    bool same_dims(const Grid& o) const { return h == o.h && w == o.w; }
};

using Heatmap = Grid;

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Peak-normalized Gaussian centered at `target`, given in cell coordinates
// where integer values coincide with cell centers (cell (i,j) has center
// (ty=i, tx=j)). The cell containing the target gets value exactly 1.
Heatmap gaussian_gt_heatmap(double tx, double ty, double sigma, int grid_h, int grid_w);

// Mean pixel-wise binary cross entropy between a predicted and a ground-truth
// heatmap, with per-pixel clamping.
double bce_loss(const Heatmap& pred, const Heatmap& gt);

// Gradient of bce_loss with respect to pre-sigmoid logits:
// dL/dz_ij = (sigmoid(z_ij) - gt_ij) / (H*W).
Grid bce_grad_logits(const Grid& logits, const Heatmap& gt);

// Cell of the maximum value; ties broken by smallest row-major index.
CellIndex argmax_coords(const Heatmap& h);

}  // namespace sacf
