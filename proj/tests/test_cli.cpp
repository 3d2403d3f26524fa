#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <unistd.h>

using namespace std::string_literals;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("stcw_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args, const std::string& out_file) {
    std::string cmd = STCW_CLI_PATH + (" " + args) + " >" + out_file + " 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

double metric(const std::string& text, const std::string& key) {
    auto pos = text.find(key + "=");
    REQUIRE(pos != std::string::npos);
    return std::stod(text.substr(pos + key.size() + 1));
}

const char* kTinyShapes =
    "task=shapes2d\nnum_classes=4\nsamples_train=64\nsamples_test=32\n"
    "iterations=20\nbatch_size=8\nseed=1\n";
const char* kTinyMotion =
    "task=motion3d\nnum_classes=4\nsamples_train=48\nsamples_test=24\n"
    "iterations=15\nbatch_size=8\nconv_freeze_iters=5\nseed=1\n";

}  // namespace

TEST_CASE("full pipeline: pretrain, inflate, finetune, eval, verify, dump") {
    TempDir dir;
    write_file(dir.file("shapes.cfg"), kTinyShapes);
    write_file(dir.file("motion.cfg"), kTinyMotion);

    CHECK(run("pretrain2d --config " + dir.file("shapes.cfg") + " --out " + dir.file("m2d.stcw"),
              dir.file("o1")) == 0);
    CHECK(metric(slurp(dir.file("o1")), "test_acc") >= 0.0);

    // all four methods inflate and verify cleanly
    for (const std::string m : {"ia", "is", "zwi", "nwi"}) {
        std::string out3d = dir.file("m3d_" + m + ".stcw");
        CHECK(run("inflate --in " + dir.file("m2d.stcw") + " --method " + m + " --out " + out3d +
                      " --report " + dir.file("report_" + m + ".txt"),
                  dir.file("o2")) == 0);
        CHECK(run("verify --model2d " + dir.file("m2d.stcw") + " --model3d " + out3d,
                  dir.file("o3")) == 0);
    }

    std::string report = slurp(dir.file("report_ia.txt"));
    CHECK(report.find("alphas=0.333333,0.333333,0.333333") != std::string::npos);
    report = slurp(dir.file("report_nwi.txt"));
    CHECK(report.find("alphas=1.666667,-0.333333,-0.333333") != std::string::npos);
    report = slurp(dir.file("report_is.txt"));
    CHECK(report.find("alphas=0.250000,0.500000,0.250000") != std::string::npos);

    CHECK(run("finetune3d --in " + dir.file("m3d_nwi.stcw") + " --config " +
                  dir.file("motion.cfg") + " --out " + dir.file("t.stcw"),
              dir.file("o4")) == 0);
    CHECK(run("eval --model " + dir.file("t.stcw") + " --config " + dir.file("motion.cfg") +
                  " --dump-probs " + dir.file("probs.stcw"),
              dir.file("o5")) == 0);
    double acc = metric(slurp(dir.file("o5")), "test_acc");

    // fuse(A, A) == A
    CHECK(run("fuse --probs " + dir.file("probs.stcw") + "," + dir.file("probs.stcw"),
              dir.file("o6")) == 0);
    CHECK(metric(slurp(dir.file("o6")), "fused_acc") == doctest::Approx(acc).epsilon(1e-9));

    // kernel dumps: 8 output channels x 3 temporal slices for conv1
    CHECK(run("dump-kernels --model " + dir.file("t.stcw") + " --layer conv1 --out " +
                  dir.file("kernels") + " --similarity",
              dir.file("o7")) == 0);
    std::size_t ppm_count = 0;
    for (const auto& entry : fs::directory_iterator(dir.file("kernels")))
        if (entry.path().extension() == ".ppm") ++ppm_count;
    CHECK(ppm_count == 24);
    std::string o7 = slurp(dir.file("o7"));
    CHECK(o7.find("similarity=") != std::string::npos);

    // fresh IA inflation similarity is 1.0
    CHECK(run("dump-kernels --model " + dir.file("m3d_ia.stcw") + " --layer conv1 --out " +
                  dir.file("kernels_ia") + " --similarity",
              dir.file("o8")) == 0);
    CHECK(metric(slurp(dir.file("o8")), "similarity") == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("identical invocations give bitwise identical outputs") {
    TempDir dir;
    write_file(dir.file("shapes.cfg"), kTinyShapes);
    CHECK(run("pretrain2d --config " + dir.file("shapes.cfg") + " --out " + dir.file("a.stcw"),
              dir.file("oa")) == 0);
    CHECK(run("pretrain2d --config " + dir.file("shapes.cfg") + " --out " + dir.file("b.stcw"),
              dir.file("ob")) == 0);
    std::ifstream a(dir.file("a.stcw"), std::ios::binary), b(dir.file("b.stcw"), std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    CHECK(slurp(dir.file("oa")) == slurp(dir.file("ob")));
}

TEST_CASE("exit codes") {
    TempDir dir;
    // validation errors -> 1
    CHECK(run("pretrain2d --config " + dir.file("missing.cfg") + " --out " + dir.file("x.stcw"),
              dir.file("e1")) == 1);
    write_file(dir.file("bad.cfg"), "task=shapes2d\nbogus_key=1\n");
    CHECK(run("pretrain2d --config " + dir.file("bad.cfg") + " --out " + dir.file("x.stcw"),
              dir.file("e2")) == 1);
    CHECK(run("frobnicate", dir.file("e3")) == 1);
    CHECK(run("inflate --in nowhere.stcw --method warp --out x.stcw", dir.file("e4")) == 1);

    // gradcheck passes -> 0
    CHECK(run("gradcheck --seed 0", dir.file("g")) == 0);
    CHECK(metric(slurp(dir.file("g")), "max_rel_err") < 1e-6);

    // tampered 3D checkpoint -> verify reports tolerance failure (2)
    write_file(dir.file("shapes.cfg"), kTinyShapes);
    CHECK(run("pretrain2d --config " + dir.file("shapes.cfg") + " --out " + dir.file("m.stcw"),
              dir.file("e5")) == 0);
    CHECK(run("inflate --in " + dir.file("m.stcw") + " --method zwi --out " + dir.file("m3.stcw"),
              dir.file("e6")) == 0);

    // move the conv weights via an unfrozen finetune; verify must then flag it
    write_file(dir.file("motion.cfg"),
               "task=motion3d\nnum_classes=4\nsamples_train=32\nsamples_test=16\n"
               "iterations=30\nbatch_size=8\nconv_freeze_iters=0\nlr=0.2\nseed=1\n");
    CHECK(run("finetune3d --in " + dir.file("m3.stcw") + " --config " + dir.file("motion.cfg") +
                  " --out " + dir.file("trained.stcw"),
              dir.file("e7")) == 0);
    CHECK(run("verify --model2d " + dir.file("m.stcw") + " --model3d " + dir.file("trained.stcw"),
              dir.file("e8")) == 2);
    // informational mode downgrades to success with a note
    CHECK(run("verify --model2d " + dir.file("m.stcw") + " --model3d " + dir.file("trained.stcw") +
                  " --informational",
              dir.file("e9")) == 0);
    CHECK(slurp(dir.file("e9")).find("post-training, informational") != std::string::npos);
}
