#include "sacf/heatmap.hpp"

#include <stdexcept>

namespace sacf {

Heatmap gaussian_gt_heatmap(double tx, double ty, double sigma, int grid_h, int grid_w) {
    if (sigma <= 0.0) throw std::invalid_argument("gaussian_gt_heatmap: sigma must be > 0");
    if (tx < -0.5 || tx >= grid_w - 0.5 || ty < -0.5 || ty >= grid_h - 0.5)
        throw std::invalid_argument("gaussian_gt_heatmap: target outside grid");

    const int tcol = static_cast<int>(std::floor(tx + 0.5));
    const int trow = static_cast<int>(std::floor(ty + 0.5));
    const double inv = 1.0 / (2.0 * sigma * sigma);

    Heatmap out(grid_h, grid_w);
    for (int i = 0; i < grid_h; ++i)
        for (int j = 0; j < grid_w; ++j)
            out.at(i, j) = std::exp(-((i - ty) * (i - ty) + (j - tx) * (j - tx)) * inv);

    const double peak = out.at(trow, tcol);
    for (double& v : out.v) v /= peak;
    return out;
}

double bce_loss(const Heatmap& pred, const Heatmap& gt) {
    if (!pred.same_dims(gt)) throw std::invalid_argument("bce_loss: dimension mismatch");
    double acc = 0.0;
    for (std::size_t k = 0; k < pred.v.size(); ++k) {
        const double p = std::clamp(pred.v[k], kBceEps, 1.0 - kBceEps);
        const double g = gt.v[k];
        acc += g * std::log(p) + (1.0 - g) * std::log(1.0 - p);
    }
    return -acc / static_cast<double>(pred.size());
}

Grid bce_grad_logits(const Grid& logits, const Heatmap& gt) {
    if (!logits.same_dims(gt)) throw std::invalid_argument("bce_grad_logits: dimension mismatch");
    Grid g(logits.h, logits.w);
    const double scale = 1.0 / static_cast<double>(logits.size());
    for (std::size_t k = 0; k < g.v.size(); ++k)
        g.v[k] = (sigmoid(logits.v[k]) - gt.v[k]) * scale;
    return g;
}

CellIndex argmax_coords(const Heatmap& h) {
    if (h.v.empty()) throw std::invalid_argument("argmax_coords: empty heatmap");
    std::size_t best = 0;
    for (std::size_t k = 1; k < h.v.size(); ++k)
        if (h.v[k] > h.v[best]) best = k;
    return {static_cast<int>(best) / h.w, static_cast<int>(best) % h.w};
}

}  // namespace sacf
