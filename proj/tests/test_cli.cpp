#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kSource = FAIRTREE_SOURCE_DIR;
const std::string kColor = kSource + "/data/color/";
const std::string kToy = kSource + "/data/toy/";

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    Result r;
    r.code = fairtree::cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("fairtree_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

/// Preprocessed toy data in dir/train.json and dir/test.json.
fs::path toy_data(const std::string& name)
{
    const auto dir = scratch(name);
    const auto r = run({"preprocess", "--csv", kToy + "toy.csv", "--schema", kToy + "schema.json", "--out",
                        dir.string(), "--seed", "3"});
    REQUIRE(r.code == 0);
    return dir;
}

std::vector<std::string> fatt_args(const fs::path& dir, const std::string& out, const std::string& jobs)
{
    return {"train", "--kind", "fatt", "--dataset", (dir / "train.json").string(), "--similarity",
            kToy + "noise-cat.json", "--population", "6", "--iterations", "3", "--seed", "11", "--jobs", jobs,
            "--out", (dir / out).string()};
}

} // namespace

TEST_CASE("preprocess writes encoded splits and reports their shape")
{
    const auto dir = scratch("prep");
    const auto r = run({"preprocess", "--csv", kToy + "toy.csv", "--schema", kToy + "schema.json", "--out",
                        dir.string(), "--test-fraction", "0.25"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("training samples 45, test samples 15") != std::string::npos);
    CHECK(fs::exists(dir / "train.json"));
    CHECK(fs::exists(dir / "test.json"));
}

TEST_CASE("generate-synthetic honours the sample count")
{
    const auto dir = scratch("synth");
    REQUIRE(run({"generate-synthetic", "--samples", "100", "--out", dir.string()}).code == 0);
    const auto train = nlohmann::json::parse(slurp(dir / "train.json"));
    const auto test = nlohmann::json::parse(slurp(dir / "test.json"));
    CHECK(train.at("samples").size() == 80);
    CHECK(test.at("samples").size() == 20);
}

TEST_CASE("train cart and rf write models and logs")
{
    const auto dir = toy_data("train");
    auto r = run({"train", "--kind", "cart", "--dataset", (dir / "train.json").string(), "--max-depth", "3", "--out",
                  (dir / "cart.json").string()});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "cart.json"));
    CHECK(fs::exists(dir / "cart.log"));
    r = run({"train", "--kind", "rf", "--dataset", (dir / "train.json").string(), "--n-trees", "3", "--out",
             (dir / "rf.json").string(), "--tune", "--grid-depths", "2,4", "--grid-trees", "2,3"});
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(slurp(dir / "rf.json")).at("kind") == "forest");
}

TEST_CASE("fatt training is byte-identical across reruns and job counts")
{
    const auto dir = toy_data("fatt");
    REQUIRE(run(fatt_args(dir, "a.json", "1")).code == 0);
    REQUIRE(run(fatt_args(dir, "b.json", "1")).code == 0);
    REQUIRE(run(fatt_args(dir, "c.json", "4")).code == 0);
    const auto a = slurp(dir / "a.json");
    CHECK(!a.empty());
    CHECK(slurp(dir / "b.json") == a);
    CHECK(slurp(dir / "c.json") == a);
    CHECK(slurp(dir / "b.log.csv") == slurp(dir / "a.log.csv"));
    CHECK(slurp(dir / "c.log.csv") == slurp(dir / "a.log.csv"));
}

TEST_CASE("hinted cart needs a hint")
{
    const auto dir = toy_data("hinted");
    auto r = run({"train", "--kind", "hinted-cart", "--dataset", (dir / "train.json").string(), "--out",
                  (dir / "h.json").string()});
    CHECK(r.code == 1);
    REQUIRE(run(fatt_args(dir, "fatt.json", "1")).code == 0);
    r = run({"train", "--kind", "hinted-cart", "--dataset", (dir / "train.json").string(), "--hint-model",
             (dir / "fatt.json").string(), "--out", (dir / "h.json").string()});
    CHECK(r.code == 0);
}

TEST_CASE("verify the worked example forest")
{
    const auto dir = scratch("verify");
    const auto r = run({"verify", "--model", kColor + "forest.json", "--dataset", kColor + "individuals.json",
                        "--similarity", kColor + "cat-sex.json", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto agg = nlohmann::json::parse(r.out);
    CHECK(agg.at("fairness") == 1.0);
    CHECK(agg.at("stable") == 4);
    CHECK_FALSE(agg.contains("mean_time_ms"));
    CHECK(nlohmann::json::parse(slurp(dir / "aggregate.json")) == agg);

    std::istringstream csv(slurp(dir / "verdicts.csv"));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(csv, line))
        lines.push_back(line);
    REQUIRE(lines.size() == 5);
    CHECK(lines[0].rfind("index,label,status", 0) == 0);
    CHECK(lines[1].find("stable") != std::string::npos);

    const auto color = run({"verify", "--model", kColor + "forest.json", "--dataset", kColor + "individuals.json",
                            "--similarity", kColor + "cat-color.json"});
    REQUIRE(color.code == 0);
    CHECK(nlohmann::json::parse(color.out).at("unstable") == 4);
}

TEST_CASE("bad inputs map to exit codes")
{
    const auto dir = toy_data("errors");
    const std::vector<std::string> base{"verify", "--model", kColor + "forest.json", "--dataset",
                                        kColor + "individuals.json", "--similarity", kColor + "cat-sex.json"};
    auto args = base;
    args.insert(args.end(), {"--timeout-ms", "0"});
    CHECK(run(args).code == 1);

    // model fitted on another schema
    auto r = run({"verify", "--model", kColor + "forest.json", "--dataset", (dir / "test.json").string(),
                  "--similarity", kToy + "noise-cat.json"});
    CHECK(r.code == 2);
    CHECK(!r.err.empty());

    std::ofstream(dir / "broken.json") << "{\"format\": ";
    args = base;
    args[2] = (dir / "broken.json").string();
    CHECK(run(args).code == 2);

    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"verify", "--model", "/nonexistent.json"}).code == 1);
    CHECK(run({"train", "--kind", "svm", "--dataset", (dir / "train.json").string(), "--out", "x"}).code == 1);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("evaluate and benchmark")
{
    const auto dir = toy_data("bench");
    REQUIRE(run({"train", "--kind", "cart", "--dataset", (dir / "train.json").string(), "--out",
                 (dir / "cart.json").string()})
                .code == 0);
    auto r = run({"evaluate", "--model", (dir / "cart.json").string(), "--dataset", (dir / "test.json").string(),
                  "--similarity", kToy + "noise-cat.json", "--out", (dir / "report.json").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("Fair noise-cat %") != std::string::npos);
    CHECK(fs::exists(dir / "report.json"));

    const auto out = dir / "bench";
    r = run({"benchmark", "--dataset", (dir / "train.json").string(), "--test", (dir / "test.json").string(),
             "--similarity", kToy + "noise-cat.json", "--models", "cart,fatt", "--population", "6", "--iterations",
             "2", "--grid-depths", "2,3", "--out", out.string()});
    REQUIRE(r.code == 0);
    const auto table = slurp(out / "table.txt");
    CHECK(table.find("\ncart ") != std::string::npos);
    CHECK(table.find("\nfatt ") != std::string::npos);
    CHECK(table.find("\nrf ") == std::string::npos);
    CHECK(table.find("hinted-cart") == std::string::npos);
    const auto report = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK(report.size() == 2);
}
