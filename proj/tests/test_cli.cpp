#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "semmp/cli.hpp"
#include "semmp/dataset.hpp"
#include "semmp/porometry.hpp"

namespace fs = std::filesystem;
using semmp::cli::kExitIo;
using semmp::cli::kExitOk;
using semmp::cli::kExitValidation;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    Outcome o;
    o.code = semmp::cli::run(args, out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

std::vector<std::string> images_in(const fs::path& dir) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

void make_corpus(const fs::path& dir, int n = 6, int side = 256) {
    const auto r = run({"synth", "--out", dir.string(), "--images", std::to_string(n), "--side", std::to_string(side),
                        "--particles", "3", "--diameter-min", "12", "--diameter-max", "30", "--seed", "9"});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
}

}  // namespace

TEST_CASE("evaluate on identical label directories scores 1.0") {
    testing::TempDir dir;
    make_corpus(dir / "c");
    const auto r = run({"evaluate", "--gt", (dir / "c" / "labels").string(), "--pred", (dir / "c" / "labels").string(),
                        "--images", (dir / "c" / "images").string(), "--model", "self"});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    CHECK(r.out == "model,f1,precision,recall,map50,map50_95,fitness\nself,1,1,1,1,1,1\n");
    CHECK(r.err.find("scored as 1.0") != std::string::npos);
}

TEST_CASE("split output is byte-identical across runs") {
    testing::TempDir dir;
    make_corpus(dir / "c", 12, 96);
    for (const char* out : {"s1", "s2"}) {
        const auto r = run({"split", "--index", (dir / "c" / "index.csv").string(), "--seed", "7", "--out",
                            (dir / out).string()});
        REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    }
    std::string diff;
    CHECK_MESSAGE(testing::same_tree(dir / "s1", dir / "s2", &diff), diff);
    CHECK_FALSE(testing::slurp(dir / "s1" / "test.txt").empty());
}

TEST_CASE("pores recover the synthetic pore side within 7.5 percent") {
    testing::TempDir dir;
    const auto s = run({"synth", "--out", (dir / "c").string(), "--images", "8", "--side", "512", "--seed", "2"});
    REQUIRE_MESSAGE(s.code == kExitOk, s.err);
    const auto r = run(concat({"pores", "--out", (dir / "pores.csv").string(), "--in"}, images_in(dir / "c" / "images")));
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    const auto est = semmp::porometry::parse_pore_csv(testing::slurp(dir / "pores.csv"));
    REQUIRE(est.size() == 8);
    for (const auto& [id, pore] : est) {
        INFO(id);
        CHECK(std::abs(pore.side_px - 20.0) / 20.0 <= 0.075);
    }
}

TEST_CASE("report formats the evaluate CSV") {
    testing::TempDir dir;
    testing::spit(dir / "r.csv", "model,f1,precision,recall,map50,map50_95,fitness\n8n-seg,0,0.644,0.678,0.678,0.468,0\n");
    auto r = run({"report", "--in", (dir / "r.csv").string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out == "model,f1,precision,recall,map50,map50_95,fitness\n8n-seg,0.661,0.644,0.678,0.678,0.468,0.657\n");

    r = run({"report", "--in", (dir / "r.csv").string(), "--format", "table"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("8n-seg |    0.661 |") != std::string::npos);

    testing::spit(dir / "empty.csv", "");
    r = run({"report", "--in", (dir / "empty.csv").string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out == "model,f1,precision,recall,map50,map50_95,fitness\n");

    testing::spit(dir / "bad.csv", "model;precision\nx;y\n");
    r = run({"report", "--in", (dir / "bad.csv").string()});
    CHECK(r.code == kExitValidation);
    CHECK(r.err.find("error:") == 0);
}

TEST_CASE("exit codes separate validation and I/O failures") {
    testing::TempDir dir;
    CHECK(run({"report", "--in", (dir / "nope.csv").string()}).code == kExitIo);
    CHECK(run({"crop", "--in", (dir / "nope.pgm").string(), "--out", (dir / "o").string()}).code == kExitIo);
    CHECK(run({"crop", "--bogus"}).code == kExitValidation);
    CHECK(run({}).code == kExitValidation);
    CHECK(run({"enhance", "--method", "sharpen", "--in", "x", "--out", "y"}).code == kExitValidation);
    CHECK(run({"--jobs", "0", "report", "--in", "x"}).code == kExitValidation);
    CHECK(run({"synth", "--out", (dir / "s").string(), "--pitch", "20", "--pore-side", "20"}).code == kExitValidation);

    // A 4x4 image is smaller than the requested crop.
    testing::spit(dir / "tiny.pgm", std::string("P5\n4 4\n255\n") + std::string(16, '\x10'));
    const auto r = run({"crop", "--in", (dir / "tiny.pgm").string(), "--out", (dir / "o").string(), "--side", "8"});
    CHECK(r.code == kExitValidation);
    CHECK(r.out.empty());
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("help exits cleanly") {
    const auto r = run({"--help"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("filter-labels") != std::string::npos);
}

TEST_CASE("config file values apply and flags override them") {
    testing::TempDir dir;
    make_corpus(dir / "c", 12, 96);
    testing::spit(dir / "cfg.ini", "split.seed = 7\nsplit.test-frac = 0.5\n");
    const auto index = (dir / "c" / "index.csv").string();

    REQUIRE(run({"--config", (dir / "cfg.ini").string(), "split", "--index", index, "--out", (dir / "a").string()}).code ==
            kExitOk);
    REQUIRE(run({"split", "--index", index, "--seed", "7", "--test-frac", "0.5", "--out", (dir / "b").string()}).code ==
            kExitOk);
    CHECK(testing::same_tree(dir / "a", dir / "b"));

    REQUIRE(run({"--config", (dir / "cfg.ini").string(), "split", "--index", index, "--test-frac", "0.25", "--out",
                 (dir / "c2").string()})
                .code == kExitOk);
    REQUIRE(run({"split", "--index", index, "--seed", "7", "--test-frac", "0.25", "--out", (dir / "d").string()}).code ==
            kExitOk);
    CHECK(testing::same_tree(dir / "c2", dir / "d"));
    CHECK_FALSE(testing::same_tree(dir / "a", dir / "d"));
}

TEST_CASE("per-image commands give identical output for any job count") {
    testing::TempDir dir;
    make_corpus(dir / "c", 6, 128);
    const auto inputs = images_in(dir / "c" / "images");
    for (const char* jobs : {"1", "4"}) {
        const fs::path out = dir / (std::string("j") + jobs);
        REQUIRE(run(concat({"--jobs", jobs, "enhance", "--method", "clahe", "--out", (out / "clahe").string(), "--in"},
                           inputs))
                    .code == kExitOk);
        REQUIRE(run(concat({"--jobs", jobs, "crop", "--side", "100", "--out", (out / "crop").string(), "--in"}, inputs))
                    .code == kExitOk);
        REQUIRE(run(concat({"--jobs", jobs, "pores", "--out", (out / "pores.csv").string(), "--in"}, inputs)).code ==
                kExitOk);
        REQUIRE(run({"--jobs", jobs, "synth", "--out", (out / "synth").string(), "--images", "5", "--side", "96",
                     "--particles", "2", "--diameter-min", "8", "--diameter-max", "16"})
                    .code == kExitOk);
    }
    std::string diff;
    CHECK_MESSAGE(testing::same_tree(dir / "j1", dir / "j4", &diff), diff);
}

TEST_CASE("filter-labels writes a pruned, relocatable index") {
    testing::TempDir dir;
    make_corpus(dir / "c", 8, 256);
    const auto r = run({"filter-labels", "--index", (dir / "c" / "index.csv").string(), "--factor", "1.2", "--out",
                        (dir / "f").string()});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
    const auto index = semmp::dataset::read_index(dir / "f" / "index.csv");
    CHECK(index.entries.size() <= 8);
    for (const auto& e : index.entries) {
        CHECK(fs::exists(index.resolve(e.image_path)));
        CHECK_FALSE(testing::slurp(index.resolve(e.label_path)).empty());
    }
}

TEST_CASE("classify reports one row per annotation") {
    testing::TempDir dir;
    const auto bar = testing::pixel_rect(100, 100, 200, 110, 1000, 1000);
    const auto sq = testing::pixel_rect(300, 300, 340, 340, 1000, 1000);
    testing::spit(dir / "l.txt", semmp::annotations::write_label_file({{0, bar, {}}, {0, sq, {}}}, false));
    const auto r = run({"classify", "--labels", (dir / "l.txt").string(), "--width", "1000", "--height", "1000"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out ==
          "index,area_px,length_px,width_px,elongation,class\n"
          "0,1000,100.000,10.000,10.000,fiber\n"
          "1,1600,40.000,40.000,1.000,particle\n");
}
