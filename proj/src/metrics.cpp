#include "sacf/metrics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

using nlohmann::json;

namespace sacf {

double l2_normalized(const Point& pred, const Point& gt, int width, int height) {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("l2_normalized: nonpositive frame dimensions");
    const double dx = (pred.x - gt.x) / width;
    const double dy = (pred.y - gt.y) / height;
    return std::sqrt(dx * dx + dy * dy);
}

L2ByClass l2_by_class(const std::vector<double>& l2, const std::vector<Category>& categories) {
    if (l2.size() != categories.size())
        throw std::invalid_argument("l2_by_class: length mismatch");
    double sums[3] = {0, 0, 0};
    int counts[3] = {0, 0, 0};
    for (std::size_t i = 0; i < l2.size(); ++i) {
        int k;
        switch (categories[i]) {
            case Category::Object: k = 0; break;
            case Category::Face: k = 1; break;
            case Category::PersonNonFace: k = 2; break;
            default:
                throw std::invalid_argument("l2_by_class: Noninclusive frames must be filtered");
        }
        sums[k] += l2[i];
        counts[k]++;
    }
    L2ByClass out;
    if (counts[0]) out.obj = sums[0] / counts[0];
    if (counts[1]) out.face = sums[1] / counts[1];
    if (counts[2]) out.pnf = sums[2] / counts[2];
    return out;
}

namespace {

double safe_div(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

PrfReport binary_prf(const Confusion& c) {
    if (c.tp < 0 || c.fp < 0 || c.fn < 0 || c.tn < 0)
        throw std::invalid_argument("binary_prf: negative counts");
    PrfReport r;
    r.face.precision = safe_div(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
    r.face.recall = safe_div(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
    r.face.f1 = f1_of(r.face.precision, r.face.recall);
    r.face.support = static_cast<int>(c.tp + c.fn);
    r.not_face.precision = safe_div(static_cast<double>(c.tn), static_cast<double>(c.tn + c.fn));
    r.not_face.recall = safe_div(static_cast<double>(c.tn), static_cast<double>(c.tn + c.fp));
    r.not_face.f1 = f1_of(r.not_face.precision, r.not_face.recall);
    r.not_face.support = static_cast<int>(c.tn + c.fp);
    r.macro_precision = 0.5 * (r.face.precision + r.not_face.precision);
    r.macro_recall = 0.5 * (r.face.recall + r.not_face.recall);
    r.macro_f1 = 0.5 * (r.face.f1 + r.not_face.f1);
    return r;
}

double cohen_kappa(const std::vector<std::vector<long long>>& matrix) {
    const std::size_t K = matrix.size();
    if (K == 0) throw std::invalid_argument("cohen_kappa: empty matrix");
    long long total = 0, diag = 0;
    std::vector<long long> row(K, 0), col(K, 0);
    for (std::size_t i = 0; i < K; ++i) {
        if (matrix[i].size() != K) throw std::invalid_argument("cohen_kappa: matrix not square");
        for (std::size_t j = 0; j < K; ++j) {
            const long long v = matrix[i][j];
            if (v < 0) throw std::invalid_argument("cohen_kappa: negative count");
            total += v;
            row[i] += v;
            col[j] += v;
            if (i == j) diag += v;
        }
    }
    if (total == 0) throw std::invalid_argument("cohen_kappa: all counts zero");
    const double n = static_cast<double>(total);
    const double po = diag / n;
    double pe = 0.0;
    for (std::size_t k = 0; k < K; ++k) pe += (row[k] / n) * (col[k] / n);
    if (pe >= 1.0) {
        if (po >= 1.0) return 1.0;
        throw std::invalid_argument("cohen_kappa: degenerate marginals (p_e = 1, p_o < 1)");
    }
    return (po - pe) / (1.0 - pe);
}

std::vector<double> agreement_curve(const std::vector<std::pair<BBox, BBox>>& pairs,
                                    const std::vector<double>& thresholds) {
    if (pairs.empty()) throw std::invalid_argument("agreement_curve: empty pair list");
    std::vector<double> ious;
    ious.reserve(pairs.size());
    for (const auto& [a, b] : pairs) ious.push_back(iou(a, b));
    std::vector<double> rates;
    rates.reserve(thresholds.size());
    for (double t : thresholds) {
        if (t < 0.0 || t > 1.0)
            throw std::invalid_argument("agreement_curve: threshold outside [0,1]");
        int agree = 0;
        for (double v : ious)
            if (v > t) ++agree;
        rates.push_back(static_cast<double>(agree) / static_cast<double>(ious.size()));
    }
    return rates;
}

std::string EvalReport::to_json() const {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json j;
    j["mode"] = mode;
    j["n_frames"] = n_frames;
    j["l2_mean"] = l2_mean;
    j["l2_obj"] = opt(l2_obj);
    j["l2_face"] = opt(l2_face);
    j["l2_pnf"] = opt(l2_pnf);
    j["face"] = {{"precision", prf.face.precision},
                 {"recall", prf.face.recall},
                 {"f1", prf.face.f1},
                 {"support", prf.face.support}};
    j["not_face"] = {{"precision", prf.not_face.precision},
                     {"recall", prf.not_face.recall},
                     {"f1", prf.not_face.f1},
                     {"support", prf.not_face.support}};
    j["macro"] = {{"precision", prf.macro_precision},
                  {"recall", prf.macro_recall},
                  {"f1", prf.macro_f1}};
    j["confusion"] = {{"tp", confusion.tp}, {"fp", confusion.fp}, {"fn", confusion.fn}, {"tn", confusion.tn}};
    return j.dump(2);
}

std::string EvalReport::csv_header() {
    return "mode,n_frames,l2_mean,l2_obj,l2_face,l2_pnf,p_face,r_face,f1_face,"
           "p_notface,r_notface,f1_notface,p_macro,r_macro,f1_macro,tp,fp,fn,tn";
}

std::string EvalReport::to_csv_row() const {
    std::ostringstream os;
    os.precision(10);
    auto opt = [&](const std::optional<double>& v) -> std::string {
        if (!v) return "";
        std::ostringstream o;
        o.precision(10);
        o << *v;
        return o.str();
    };
    os << mode << ',' << n_frames << ',' << l2_mean << ',' << opt(l2_obj) << ',' << opt(l2_face)
       << ',' << opt(l2_pnf) << ',' << prf.face.precision << ',' << prf.face.recall << ','
       << prf.face.f1 << ',' << prf.not_face.precision << ',' << prf.not_face.recall << ','
       << prf.not_face.f1 << ',' << prf.macro_precision << ',' << prf.macro_recall << ','
       << prf.macro_f1 << ',' << confusion.tp << ',' << confusion.fp << ',' << confusion.fn << ','
       << confusion.tn;
    return os.str();
}

}  // namespace sacf
