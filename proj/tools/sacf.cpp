#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sacf/dataset_io.hpp"
#include "sacf/pipeline.hpp"
#include "sacf/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;    // input / validation errors
constexpr int kExitNumeric = 3;  // training / numerical failures

struct RunConfig {
    std::string dataset_dir = "data";
    std::string model_dir = "models";
    std::string report_dir = "reports";
    sacf::GenConfig gen;
    sacf::ExpertHyper expert;
    sacf::GateHyper gate;
    sacf::AugConfig aug;
    double tau = 0.5;
    int threads = 1;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    if (const fs::path dir = fs::path(path).parent_path(); !dir.empty())
        fs::create_directories(dir);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

// Seed precedence, lowest first: built-in default, SACF_SEED env, config
// file, --seed flag.
RunConfig load_run_config(const std::string& path) {
    RunConfig rc;
    if (const char* env = std::getenv("SACF_SEED")) rc.gen.seed = std::strtoull(env, nullptr, 10);

    if (path.empty()) return rc;
    const json j = json::parse(read_file(path));
    if (j.contains("paths")) {
        const auto& p = j.at("paths");
        rc.dataset_dir = p.value("dataset_dir", rc.dataset_dir);
        rc.model_dir = p.value("model_dir", rc.model_dir);
        rc.report_dir = p.value("report_dir", rc.report_dir);
    }
    if (j.contains("gen")) {
        sacf::GenConfig g = sacf::GenConfig::from_json(j.at("gen").dump());
        if (!j.at("gen").contains("seed")) g.seed = rc.gen.seed;
        rc.gen = g;
    }
    if (j.contains("seed")) rc.gen.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("expert")) {
        const auto& e = j.at("expert");
        rc.expert.epochs = e.value("epochs", rc.expert.epochs);
        rc.expert.learning_rate = e.value("learning_rate", rc.expert.learning_rate);
        rc.expert.batch_size = e.value("batch_size", rc.expert.batch_size);
        rc.expert.heatmap_sigma = e.value("heatmap_sigma", rc.expert.heatmap_sigma);
    }
    if (j.contains("gate")) {
        const auto& g = j.at("gate");
        rc.gate.epochs = g.value("epochs", rc.gate.epochs);
        rc.gate.learning_rate = g.value("learning_rate", rc.gate.learning_rate);
        rc.gate.class_weight = g.value("class_weight", rc.gate.class_weight);
    }
    if (j.contains("aug")) {
        const auto& a = j.at("aug");
        rc.aug.beta = a.value("beta", rc.aug.beta);
        rc.aug.keep_radius = a.value("keep_radius", rc.aug.keep_radius);
        rc.aug.blur_kernel = a.value("blur_kernel", rc.aug.blur_kernel);
    }
    rc.tau = j.value("tau", rc.tau);
    rc.threads = j.value("threads", rc.threads);
    return rc;
}

sacf::Dataset load_split_file(const RunConfig& rc, const std::string& name) {
    const std::string path = rc.dataset_dir + "/" + name + ".jsonl";
    if (!fs::exists(path)) throw std::runtime_error("missing dataset file: " + path);
    sacf::LoadOptions opts;
    opts.filter_noninclusive = true;
    return sacf::load_dataset(path, opts);
}

std::vector<const sacf::Annotation*> all_frames(const sacf::Dataset& ds) {
    std::vector<const sacf::Annotation*> out;
    out.reserve(ds.annotations.size());
    for (const auto& a : ds.annotations) out.push_back(&a);
    return out;
}

int cmd_gen(const RunConfig& rc) {
    sacf::GenConfig cfg = rc.gen;
    cfg.validate();
    const sacf::Dataset ds = sacf::make_dataset(cfg, rc.threads);

    for (const auto split : {sacf::Split::Train, sacf::Split::Val, sacf::Split::Test}) {
        sacf::Dataset part;
        for (const auto& a : ds.annotations)
            if (a.split == split) part.annotations.push_back(a);
        part.metadata = part.recount(cfg.hash(), cfg.seed);
        std::ostringstream buf;
        sacf::save_dataset_stream(part, buf);
        write_file(rc.dataset_dir + "/" + to_string(split) + ".jsonl", buf.str());
    }
    write_file(rc.dataset_dir + "/metadata.json", sacf::metadata_to_json(ds.metadata) + "\n");

    const int n = static_cast<int>(ds.annotations.size());
    int face = 0, noninc = 0;
    for (const auto& a : ds.annotations) {
        if (a.target_category == sacf::Category::Face) ++face;
        if (a.target_category == sacf::Category::Noninclusive) ++noninc;
    }
    const int not_face = n - face - noninc;
    std::cout << "Gaze target distribution (" << n << " frames)\n";
    std::printf("  %-24s %8d  %6.1f%%\n", "Face (More-social)", face, 100.0 * face / n);
    std::printf("  %-24s %8d  %6.1f%%\n", "Not Face (Less-social)", not_face,
                100.0 * not_face / n);
    if (noninc > 0) std::printf("  %-24s %8d  %6.1f%%\n", "Noninclusive", noninc, 100.0 * noninc / n);
    for (const auto& [name, count] : ds.metadata.split_counts)
        std::cout << "  split " << name << ": " << count << " frames\n";
    return kExitOk;
}

int cmd_train(const RunConfig& rc, const std::string& target) {
    const sacf::Dataset ds = load_split_file(rc, "train");
    const auto frames = all_frames(ds);
    const auto t0 = std::chrono::steady_clock::now();

    std::string out_path;
    std::string out_json;
    double final_loss = 0.0;
    try {
        if (target == "gate") {
            sacf::GateHyper hyper = rc.gate;
            hyper.seed = rc.gen.seed;
            const auto trained = sacf::train_gate(frames, hyper);
            final_loss = trained.epoch_losses.back();
            out_path = rc.model_dir + "/gate.json";
            out_json = trained.params.to_json();
        } else {
            sacf::ExpertHyper hyper = rc.expert;
            hyper.seed = rc.gen.seed;
            const auto kind = sacf::expert_kind_from_string(target);
            const auto trained = sacf::train_expert(frames, kind, hyper, rc.aug, rc.threads);
            final_loss = trained.epoch_losses.back();
            out_path = rc.model_dir + "/" + target + ".json";
            out_json = trained.params.to_json();
        }
    } catch (const std::exception& e) {
        std::cerr << "training failed: " << e.what() << "\n";
        return kExitNumeric;
    }

    write_file(out_path, out_json + "\n");
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    std::cout << "trained " << target << ": final loss " << final_loss << ", " << ms
              << " ms, wrote " << out_path << "\n";
    return kExitOk;
}

int cmd_eval(const RunConfig& rc, const std::string& mode_str, const std::string& split,
             const std::string& dump_predictions) {
    const sacf::EvalMode mode = sacf::eval_mode_from_string(mode_str);
    const sacf::Dataset ds = load_split_file(rc, split);

    auto load_expert = [&](const char* name) {
        const std::string path = rc.model_dir + "/" + name + ".json";
        if (!fs::exists(path)) throw std::runtime_error("missing model file: " + path);
        return sacf::ExpertParams::from_json(read_file(path));
    };
    sacf::SacfModel model;
    model.aware = load_expert("aware");
    model.agnostic = load_expert("agnostic");
    model.tau = rc.tau;
    model.aug = rc.aug;
    if (mode == sacf::EvalMode::Sacf) {
        const std::string path = rc.model_dir + "/gate.json";
        if (!fs::exists(path)) throw std::runtime_error("missing model file: " + path);
        model.gate = sacf::GateParams::from_json(read_file(path));
    }

    const auto out = sacf::evaluate(model, mode, all_frames(ds), rc.threads);
    write_file(rc.report_dir + "/report_" + mode_str + ".json", out.report.to_json() + "\n");
    write_file(rc.report_dir + "/report_" + mode_str + ".csv",
               sacf::EvalReport::csv_header() + "\n" + out.report.to_csv_row() + "\n");
    if (!dump_predictions.empty()) {
        std::ostringstream buf;
        for (const auto& p : out.predictions) buf << p.to_jsonl() << '\n';
        write_file(dump_predictions, buf.str());
    }
    int routed_aware = 0;
    for (const auto& p : out.predictions)
        if (p.routed_to == sacf::ExpertKind::Aware) ++routed_aware;
    std::cout << "mode " << mode_str << ": n=" << out.report.n_frames
              << " l2=" << out.report.l2_mean << " f1_macro=" << out.report.prf.macro_f1
              << " routed_aware=" << routed_aware << "\n";
    return kExitOk;
}

int cmd_analyze(const std::string& predictions_path, const std::string& dataset_path,
                const std::string& out_path) {
    std::ifstream in(predictions_path);
    if (!in) throw std::runtime_error("cannot open predictions file: " + predictions_path);
    std::vector<sacf::Prediction> preds;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        preds.push_back(sacf::Prediction::from_json_line(line, line_no));
    }
    sacf::LoadOptions opts;
    opts.filter_noninclusive = true;
    const sacf::Dataset ds = sacf::load_dataset(dataset_path, opts);
    const auto rows = sacf::scenario_analysis(preds, all_frames(ds));
    const std::string csv = sacf::scenario_csv(rows);
    if (out_path.empty())
        std::cout << csv;
    else
        write_file(out_path, csv);
    return kExitOk;
}

std::vector<double> parse_threshold_spec(const std::string& spec) {
    // "lo:hi:step" inclusive range, or a comma-separated list.
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double lo, hi, step;
        char c1, c2;
        std::istringstream ss(spec);
        if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0)
            throw std::runtime_error("bad threshold spec: " + spec);
        for (double t = lo; t <= hi + 1e-12; t += step) out.push_back(t);
    } else {
        std::istringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    }
    if (out.empty()) throw std::runtime_error("empty threshold spec");
    return out;
}

int cmd_agreement(const std::string& path_a, const std::string& path_b, const std::string& spec,
                  const std::string& out_csv, const std::string& out_json) {
    sacf::LoadOptions opts;
    opts.validate = true;
    const sacf::Dataset a = sacf::load_dataset(path_a, opts);
    const sacf::Dataset b = sacf::load_dataset(path_b, opts);

    std::map<std::string, const sacf::Annotation*> b_by_id;
    for (const auto& ann : b.annotations) b_by_id[ann.frame_id] = &ann;

    std::vector<std::pair<sacf::BBox, sacf::BBox>> pairs;
    std::map<std::string, int> cat_index;
    std::vector<std::string> cats;
    std::vector<std::pair<int, int>> labels;
    for (const auto& ann : a.annotations) {
        const auto it = b_by_id.find(ann.frame_id);
        if (it == b_by_id.end()) continue;
        const sacf::Annotation& other = *it->second;
        if (ann.target_box && other.target_box) pairs.emplace_back(*ann.target_box, *other.target_box);
        auto idx = [&](sacf::Category c) {
            const std::string name = to_string(c);
            auto [pos, inserted] = cat_index.try_emplace(name, static_cast<int>(cats.size()));
            if (inserted) cats.push_back(name);
            return pos->second;
        };
        labels.emplace_back(idx(ann.target_category), idx(other.target_category));
    }
    if (labels.empty()) throw std::runtime_error("no shared frame_ids between the two files");
    if (pairs.empty()) throw std::runtime_error("no shared frames with target boxes");

    const auto thresholds = parse_threshold_spec(spec);
    const auto rates = sacf::agreement_curve(pairs, thresholds);

    std::vector<std::vector<long long>> confusion(cats.size(),
                                                  std::vector<long long>(cats.size(), 0));
    for (const auto& [ia, ib] : labels) confusion[ia][ib]++;
    const double kappa = sacf::cohen_kappa(confusion);

    std::ostringstream csv;
    csv.precision(10);
    csv << "threshold,agreement_rate\n";
    for (std::size_t i = 0; i < thresholds.size(); ++i)
        csv << thresholds[i] << ',' << rates[i] << '\n';
    if (out_csv.empty())
        std::cout << csv.str();
    else
        write_file(out_csv, csv.str());

    json j;
    j["kappa"] = kappa;
    j["categories"] = cats;
    j["confusion"] = confusion;
    j["n_pairs"] = pairs.size();
    if (out_json.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_file(out_json, j.dump(2) + "\n");

    std::cout << "kappa " << kappa << " over " << labels.size() << " shared frames\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Socially aware coarse-to-fine gaze target pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed_flag = 0;
    bool seed_given = false;
    int threads_flag = 0;
    app.add_option("--config", config_path, "RunConfig JSON file")->capture_default_str();
    app.add_option("--seed", seed_flag, "Override the config seed")
        ->each([&](const std::string&) { seed_given = true; });
    app.add_option("--threads", threads_flag, "Worker thread cap (does not change outputs)");

    auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
    int gen_frames = -1;
    double noninc = -1.0;
    std::string out_dir;
    gen->add_option("--n-frames", gen_frames, "Override frame count");
    gen->add_option("--include-noninclusive", noninc, "Probability of Noninclusive frames");
    gen->add_option("--out", out_dir, "Output dataset directory");

    auto* train = app.add_subcommand("train", "Train an expert or the gate");
    std::string target;
    train->add_option("--target", target, "aware|agnostic|gate")->required();

    auto* eval = app.add_subcommand("eval", "Evaluate a routing mode");
    std::string mode_str = "sacf";
    std::string split = "test";
    std::string dump_predictions;
    double tau_flag = -1.0;
    eval->add_option("--mode", mode_str, "sacf|sacf-oracle|agnostic|aware")->capture_default_str();
    eval->add_option("--split", split, "train|val|test")->capture_default_str();
    eval->add_option("--tau", tau_flag, "Gate threshold in [0,1]");
    eval->add_option("--dump-predictions", dump_predictions, "Per-frame predictions JSONL path");

    auto* analyze = app.add_subcommand("analyze", "Four-bucket expert scenario table");
    std::string pred_path, dataset_path, analyze_out;
    analyze->add_option("--predictions", pred_path, "Predictions JSONL")->required();
    analyze->add_option("--dataset", dataset_path, "Dataset JSONL")->required();
    analyze->add_option("--out", analyze_out, "Output CSV path (stdout when omitted)");

    auto* agreement = app.add_subcommand("agreement", "Inter-annotator agreement");
    std::string file_a, file_b, thr_spec = "0.1:0.9:0.1", agr_csv, agr_json;
    agreement->add_option("--a", file_a, "First annotation JSONL")->required();
    agreement->add_option("--b", file_b, "Second annotation JSONL")->required();
    agreement->add_option("--thresholds", thr_spec, "lo:hi:step or comma list")
        ->capture_default_str();
    agreement->add_option("--out-csv", agr_csv, "Agreement curve CSV path");
    agreement->add_option("--out-json", agr_json, "Kappa / confusion JSON path");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig rc = load_run_config(config_path);
        if (seed_given) rc.gen.seed = seed_flag;
        if (threads_flag > 0) rc.threads = threads_flag;
        if (tau_flag >= 0.0) rc.tau = tau_flag;
        if (gen_frames >= 0) rc.gen.n_frames = gen_frames;
        if (noninc >= 0.0) rc.gen.noninclusive_prob = noninc;
        if (!out_dir.empty()) rc.dataset_dir = out_dir;

        if (gen->parsed()) return cmd_gen(rc);
        if (train->parsed()) return cmd_train(rc, target);
        if (eval->parsed()) return cmd_eval(rc, mode_str, split, dump_predictions);
        if (analyze->parsed()) return cmd_analyze(pred_path, dataset_path, analyze_out);
        if (agreement->parsed())
            return cmd_agreement(file_a, file_b, thr_spec, agr_csv, agr_json);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}
