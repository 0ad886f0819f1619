#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sacf/scene.hpp"

namespace sacf {

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int support = 0;
};

struct Confusion {
    // Face is the positive class.
    long long tp = 0, fp = 0, fn = 0, tn = 0;
};

struct PrfReport {
    ClassScores face;
    ClassScores not_face;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
};

struct EvalReport {
    std::string mode;
    int n_frames = 0;
    double l2_mean = 0.0;
    std::optional<double> l2_obj;
    std::optional<double> l2_face;
    std::optional<double> l2_pnf;
    PrfReport prf;
    Confusion confusion;

    std::string to_json() const;
    static std::string csv_header();
    std::string to_csv_row() const;
};

struct AgreementResult {
    std::vector<double> thresholds;
    std::vector<double> agreement_rate;
    std::vector<std::string> categories;          // confusion matrix axis labels
    std::vector<std::vector<long long>> confusion;  // [a][b] counts
    double kappa = 0.0;
};

// sqrt((dx/width)^2 + (dy/height)^2).
double l2_normalized(const Point& pred, const Point& gt, int width, int height);

struct L2ByClass {
    std::optional<double> obj, face, pnf;
};

// Per-category means; absent categories stay unset, never 0.
L2ByClass l2_by_class(const std::vector<double>& l2, const std::vector<Category>& categories);

PrfReport binary_prf(const Confusion& c);

// Chance-corrected agreement over a square confusion matrix.
double cohen_kappa(const std::vector<std::vector<long long>>& matrix);

// rate(t) = mean over pairs of [iou(a,b) > t], strict inequality.
std::vector<double> agreement_curve(const std::vector<std::pair<BBox, BBox>>& pairs,
                                    const std::vector<double>& thresholds);

}  // namespace sacf
