#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = SACF_CLI_PATH;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("sacf_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string str(const std::string& rel = "") const { return (path / rel).string(); }
};

int run(const std::string& args, std::string* out = nullptr) {
    const std::string cmd = kCli + " " + args + " >/tmp/sacf_cli_out.txt 2>&1";
    const int rc = std::system(cmd.c_str());
    if (out) {
        std::ifstream in("/tmp/sacf_cli_out.txt");
        std::ostringstream ss;
        ss << in.rdbuf();
        *out = ss.str();
    }
    return WEXITSTATUS(rc);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_config(const std::string& path, const fs::path& dir, int n_frames,
                  std::uint64_t seed, int expert_epochs = 30, int gate_epochs = 60) {
    json j;
    j["paths"] = {{"dataset_dir", (dir / "data").string()},
                  {"model_dir", (dir / "models").string()},
                  {"report_dir", (dir / "reports").string()}};
    j["gen"] = {{"n_frames", n_frames}, {"seed", seed}};
    j["expert"] = {{"epochs", expert_epochs}};
    j["gate"] = {{"epochs", gate_epochs}};
    std::ofstream out(path);
    out << j.dump(2);
}

}  // namespace

TEST_CASE("gen writes three split files and metadata") {
    TempDir tmp;
    const std::string cfg = tmp.str("cfg.json");
    write_config(cfg, tmp.path, 50, 1001);
    std::string out;
    CHECK(run("--config " + cfg + " gen", &out) == 0);
    CHECK(fs::exists(tmp.str("data/train.jsonl")));
    CHECK(fs::exists(tmp.str("data/val.jsonl")));
    CHECK(fs::exists(tmp.str("data/test.jsonl")));
    CHECK(fs::exists(tmp.str("data/metadata.json")));
    CHECK(out.find("Face (More-social)") != std::string::npos);
}

TEST_CASE("gen with zero frames fails with exit code 2") {
    TempDir tmp;
    const std::string cfg = tmp.str("cfg.json");
    write_config(cfg, tmp.path, 50, 1001);
    CHECK(run("--config " + cfg + " gen --n-frames 0") == 2);
}

TEST_CASE("gen is deterministic across reruns and thread counts") {
    TempDir tmp;
    const std::string cfg = tmp.str("cfg.json");
    write_config(cfg, tmp.path, 60, 2024);
    REQUIRE(run("--config " + cfg + " --threads 1 gen") == 0);
    const std::string first = read_file(tmp.str("data/train.jsonl"));
    REQUIRE(run("--config " + cfg + " --threads 4 gen") == 0);
    CHECK(read_file(tmp.str("data/train.jsonl")) == first);
}

TEST_CASE("train then eval full flow with all modes") {
    TempDir tmp;
    const std::string cfg = tmp.str("cfg.json");
    write_config(cfg, tmp.path, 400, 31337);
    REQUIRE(run("--config " + cfg + " --threads 4 gen") == 0);
    REQUIRE(run("--config " + cfg + " --threads 4 train --target agnostic") == 0);
    REQUIRE(run("--config " + cfg + " --threads 4 train --target aware") == 0);
    REQUIRE(run("--config " + cfg + " --threads 4 train --target gate") == 0);

    const auto aware = json::parse(read_file(tmp.str("models/aware.json")));
    const auto agnostic = json::parse(read_file(tmp.str("models/agnostic.json")));
    CHECK(aware.at("kind") == "aware");
    CHECK(agnostic.at("kind") == "agnostic");

    for (const std::string mode : {"sacf", "sacf-oracle", "agnostic", "aware"})
        CHECK(run("--config " + cfg + " eval --mode " + mode) == 0);
    for (const std::string mode : {"sacf", "sacf-oracle", "agnostic", "aware"}) {
        CHECK(fs::exists(tmp.str("reports/report_" + mode + ".json")));
        CHECK(fs::exists(tmp.str("reports/report_" + mode + ".csv")));
    }

    // tau 0 forces every frame to the aware expert.
    std::string out;
    CHECK(run("--config " + cfg + " eval --mode sacf --tau 0", &out) == 0);
    const auto report = json::parse(read_file(tmp.str("reports/report_sacf.json")));
    CHECK(out.find("routed_aware=" + std::to_string(report.at("n_frames").get<int>())) !=
          std::string::npos);
}

TEST_CASE("eval without models exits 2 naming the file") {
    TempDir tmp;
    const std::string cfg = tmp.str("cfg.json");
    write_config(cfg, tmp.path, 30, 7);
    REQUIRE(run("--config " + cfg + " gen") == 0);
    std::string out;
    CHECK(run("--config " + cfg + " eval --mode sacf", &out) == 2);
    CHECK(out.find("aware.json") != std::string::npos);
}

TEST_CASE("sacf-oracle mode needs no gate file") {
    TempDir tmp;
    const std::string cfg = tmp.str("cfg.json");
    write_config(cfg, tmp.path, 200, 11);
    REQUIRE(run("--config " + cfg + " --threads 4 gen") == 0);
    REQUIRE(run("--config " + cfg + " --threads 4 train --target agnostic") == 0);
    REQUIRE(run("--config " + cfg + " --threads 4 train --target aware") == 0);
    CHECK(run("--config " + cfg + " eval --mode sacf-oracle") == 0);
}

TEST_CASE("training the gate on single-class data exits 3") {
    TempDir tmp;
    const std::string cfg = tmp.str("cfg.json");
    json j;
    j["paths"] = {{"dataset_dir", tmp.str("data")}, {"model_dir", tmp.str("models")}};
    j["gen"] = {{"n_frames", 30},
                {"seed", 3},
                {"category_prior", {{"face", 0.0}, {"object", 1.0}, {"person_non_face", 0.0}}}};
    std::ofstream(cfg) << j.dump();
    REQUIRE(run("--config " + cfg + " gen") == 0);
    std::string out;
    CHECK(run("--config " + cfg + " train --target gate", &out) == 3);
    CHECK(out.find("single-class") != std::string::npos);
}

TEST_CASE("trained expert reloads to identical predictions") {
    TempDir tmp;
    const std::string cfg = tmp.str("cfg.json");
    write_config(cfg, tmp.path, 100, 17);
    REQUIRE(run("--config " + cfg + " --threads 4 gen") == 0);
    REQUIRE(run("--config " + cfg + " --threads 4 train --target agnostic") == 0);
    const std::string first = read_file(tmp.str("models/agnostic.json"));
    REQUIRE(run("--config " + cfg + " --threads 1 train --target agnostic") == 0);
    CHECK(read_file(tmp.str("models/agnostic.json")) == first);
}

TEST_CASE("analyze emits the four-bucket table") {
    TempDir tmp;
    const std::string cfg = tmp.str("cfg.json");
    write_config(cfg, tmp.path, 250, 19);
    REQUIRE(run("--config " + cfg + " --threads 4 gen") == 0);
    REQUIRE(run("--config " + cfg + " --threads 4 train --target agnostic") == 0);
    REQUIRE(run("--config " + cfg + " --threads 4 train --target aware") == 0);
    REQUIRE(run("--config " + cfg + " eval --mode sacf-oracle --dump-predictions " +
                tmp.str("preds.jsonl")) == 0);
    REQUIRE(run("analyze --predictions " + tmp.str("preds.jsonl") + " --dataset " +
                tmp.str("data/test.jsonl") + " --out " + tmp.str("scenario.csv")) == 0);

    const std::string csv = read_file(tmp.str("scenario.csv"));
    CHECK(csv.find("scenario,count,aware_l2,agnostic_l2") != std::string::npos);
    // Bucket counts sum to the test-split size.
    std::istringstream ss(csv);
    std::string line;
    std::getline(ss, line);
    int total = 0;
    while (std::getline(ss, line)) {
        const auto c1 = line.find(',');
        total += std::stoi(line.substr(c1 + 1));
    }
    int test_lines = 0;
    std::istringstream ts(read_file(tmp.str("data/test.jsonl")));
    while (std::getline(ts, line)) ++test_lines;
    CHECK(total == test_lines);
}

TEST_CASE("agreement of a file with itself is perfect") {
    TempDir tmp;
    const std::string cfg = tmp.str("cfg.json");
    write_config(cfg, tmp.path, 40, 23);
    REQUIRE(run("--config " + cfg + " gen") == 0);
    std::string out;
    REQUIRE(run("agreement --a " + tmp.str("data/train.jsonl") + " --b " +
                tmp.str("data/train.jsonl") + " --thresholds 0.1:0.9:0.2 --out-csv " +
                tmp.str("agr.csv") + " --out-json " + tmp.str("agr.json"), &out) == 0);
    const auto j = json::parse(read_file(tmp.str("agr.json")));
    CHECK(j.at("kappa").get<double>() == doctest::Approx(1.0));

    std::istringstream ss(read_file(tmp.str("agr.csv")));
    std::string line;
    std::getline(ss, line);  // header
    int rows = 0;
    while (std::getline(ss, line)) {
        ++rows;
        CHECK(line.substr(line.find(',') + 1) == "1");
    }
    CHECK(rows == 5);  // 0.1:0.9:0.2
}

TEST_CASE("agreement with disjoint frame ids exits 2") {
    TempDir tmp;
    auto record = [](const std::string& id) {
        json j;
        j["frame_id"] = id;
        j["clip_id"] = "c";
        j["width"] = 256;
        j["height"] = 256;
        j["child_head"] = {10, 10, 40, 40};
        j["adult_faces"] = json::array({{100, 100, 130, 130}});
        j["target_point"] = {200, 60};
        j["target_box"] = {190, 50, 220, 80};
        j["target_category"] = "object";
        j["split"] = "train";
        j["features"] = nullptr;
        return j.dump();
    };
    std::ofstream(tmp.str("a.jsonl")) << record("a1") << '\n';
    std::ofstream(tmp.str("b.jsonl")) << record("b1") << '\n';
    CHECK(run("agreement --a " + tmp.str("a.jsonl") + " --b " + tmp.str("b.jsonl")) == 2);
}

TEST_CASE("SACF_SEED env var is the lowest-precedence seed source") {
    TempDir tmp;
    json j;
    j["paths"] = {{"dataset_dir", tmp.str("data")}};
    j["gen"] = {{"n_frames", 15}};
    const std::string cfg = tmp.str("cfg.json");
    std::ofstream(cfg) << j.dump();

    REQUIRE(run("--config " + cfg + " gen", nullptr) == 0);
    const std::string default_bytes = read_file(tmp.str("data/train.jsonl"));

    setenv("SACF_SEED", "424242", 1);
    REQUIRE(run("--config " + cfg + " gen") == 0);
    const std::string env_bytes = read_file(tmp.str("data/train.jsonl"));
    CHECK(env_bytes != default_bytes);

    // An explicit --seed wins over the env var.
    REQUIRE(run("--config " + cfg + " --seed 424242 gen") == 0);
    CHECK(read_file(tmp.str("data/train.jsonl")) == env_bytes);
    unsetenv("SACF_SEED");
}
