#include "disvm/cli.hpp"
#include "disvm/error.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using disvm::cli::run;

namespace {

// Checksums of the seed-7 default synth output, frozen from the first run.
constexpr const char* kManifestA = "A.csv = 7b7920721dba4855";
constexpr const char* kManifestB = "B.csv = 1444e437ade29e6a";

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "disvm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> data_lines(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("disvm_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Small two-experiment data set for the heavier commands.
fs::path small_data() {
  static const fs::path dir = [] {
    const fs::path d = scratch("data");
    const Result r = call({"synth", "--out", d.string(), "--d", "6", "--subjects-per-experiment",
                           "2", "--samples-per-subject-per-class", "10"});
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

std::string data_arg() {
  return (small_data() / "A.csv").string() + "," + (small_data() / "B.csv").string();
}

// Same data with B marked as labeled target, which pca-t needs.
std::string target_data_arg() {
  const fs::path b = small_data() / "B_target.csv";
  if (!fs::exists(b)) {
    std::string text = slurp(small_data() / "B.csv");
    for (std::size_t pos = 0; (pos = text.find(",source,", pos)) != std::string::npos;) {
      text.replace(pos, 8, ",target_labeled,");
    }
    std::ofstream(b, std::ios::binary) << text;
  }
  return (small_data() / "A.csv").string() + "," + b.string();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("synth with defaults reproduces the recorded checksums") {
    const fs::path a = scratch("synth_a");
    const fs::path b = scratch("synth_b");
    REQUIRE(call({"synth", "--out", a.string()}).code == 0);
    REQUIRE(call({"synth", "--out", b.string(), "--seed", "7"}).code == 0);
    const std::string manifest = slurp(a / "manifest.txt");
    CHECK(manifest == slurp(b / "manifest.txt"));
    CHECK(slurp(a / "A.csv") == slurp(b / "A.csv"));
    CHECK(manifest.find(kManifestA) != std::string::npos);
    CHECK(manifest.find(kManifestB) != std::string::npos);
    REQUIRE(call({"synth", "--out", b.string(), "--seed", "8"}).code == 0);
    CHECK(slurp(a / "A.csv") != slurp(b / "A.csv"));
  }

  TEST_CASE("artifacts carry the seed and config hash") {
    const fs::path a = scratch("stamp");
    REQUIRE(call({"synth", "--out", a.string(), "--d", "5", "--seed", "3"}).code == 0);
    const std::string resolved = slurp(a / "config.resolved");
    const auto pos = resolved.find("config_hash=");
    REQUIRE(pos != std::string::npos);
    const std::string hash = resolved.substr(pos + 12, 16);
    for (const char* f : {"A.csv", "B.csv", "manifest.txt"}) {
      const std::string text = slurp(a / f);
      CHECK(text.find("seed=3") != std::string::npos);
      CHECK(text.find("config_hash=" + hash) != std::string::npos);
    }
    CHECK(resolved.find("\nd=5\n") != std::string::npos);
  }

  TEST_CASE("config file values apply and flags override them") {
    const fs::path a = scratch("config");
    {
      std::ofstream cfg(a / "run.cfg");
      cfg << "# settings\nd = 4\nnoise_std = 0.5\nseed = 9\n";
    }
    REQUIRE(call({"synth", "--out", a.string(), "--config", (a / "run.cfg").string(), "--seed",
                  "10"})
                .code == 0);
    const std::string resolved = slurp(a / "config.resolved");
    CHECK(resolved.find("\nd=4\n") != std::string::npos);
    CHECK(resolved.find("\nnoise_std=0.5\n") != std::string::npos);
    CHECK(resolved.find("\nseed=10\n") != std::string::npos);
    const auto header = data_lines(a / "A.csv").front();
    CHECK(header == "sample_id,experiment_id,subject_id,label,role,f0,f1,f2,f3");

    std::ofstream bad(a / "bad.cfg");
    bad << "colour = blue\n";
    bad.close();
    CHECK(call({"synth", "--out", a.string(), "--config", (a / "bad.cfg").string()}).code == 1);
  }

  TEST_CASE("fit writes diagnostics and decisions") {
    const fs::path out = scratch("fit");
    for (const char* m : {"disvm", "svm", "pca-t", "pca-st", "mida", "smida"}) {
      const Result r = call({"fit", "--out", out.string(), "--data", target_data_arg(), "--method", m,
                             "--subspace-dim", "4", "--c", "1", "--lambda", "0.5"});
      CHECK_MESSAGE(r.code == 0, m << ": " << r.err);
      CHECK(data_lines(out / "decisions.csv").size() == 1 + 80);
      CHECK(slurp(out / "fit.txt").find("config_hash=") != std::string::npos);
    }
  }

  TEST_CASE("sweep emits one row per lambda in grid order") {
    const fs::path out = scratch("sweep");
    const Result r = call({"sweep", "--out", out.string(), "--data", data_arg(), "--task", "A->B",
                           "--param", "lambda", "--repeats", "1", "--folds", "5"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto rows = data_lines(out / "sweep_lambda.csv");
    REQUIRE(rows.size() == 7);
    CHECK(rows[0] == "lambda,mean_accuracy,std");
    const std::vector<std::string> want = {"0", "0.01", "0.1", "1", "10", "100"};
    for (std::size_t i = 0; i < want.size(); ++i) {
      CHECK(rows[i + 1].substr(0, rows[i + 1].find(',')) == want[i]);
    }
  }

  TEST_CASE("bench tabulates methods by tasks and is reproducible") {
    const fs::path a = scratch("bench_a");
    const fs::path b = scratch("bench_b");
    const std::vector<std::string> common = {"--data", data_arg(), "--methods", "svm,disvm",
                                             "--repeats", "1", "--inner-splits", "2"};
    auto with_out = [&](const fs::path& p) {
      std::vector<std::string> args = {"bench", "--out", p.string()};
      args.insert(args.end(), common.begin(), common.end());
      return args;
    };
    REQUIRE(call(with_out(a)).code == 0);
    REQUIRE(call(with_out(b)).code == 0);
    const auto rows = data_lines(a / "results.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == "method,A->B,B->A");
    CHECK(rows[1].rfind("svm,", 0) == 0);
    CHECK(rows[2].rfind("disvm,", 0) == 0);
    for (std::size_t r = 1; r < 3; ++r) {
      std::istringstream cells(rows[r]);
      std::string cell;
      std::getline(cells, cell, ',');
      int n = 0;
      while (std::getline(cells, cell, ',')) {
        ++n;
        CHECK(cell.find("±") != std::string::npos);
      }
      CHECK(n == 2);
    }
    CHECK(slurp(a / "results.csv") == slurp(b / "results.csv"));
    CHECK(slurp(a / "results_detail.csv") == slurp(b / "results_detail.csv"));
  }

  TEST_CASE("exit codes") {
    const fs::path out = scratch("codes");
    CHECK(call({}).code == 1);
    CHECK(call({"frobnicate"}).code == 1);
    CHECK(call({"synth", "--no-such-flag"}).code == 1);
    CHECK(call({"fit", "--out", out.string()}).code == 1);
    CHECK(call({"fit", "--out", out.string(), "--data", data_arg(), "--method", "tca"}).code == 1);
    CHECK(call({"fit", "--out", out.string(), "--data", data_arg(), "--kernel", "sigmoid"}).code ==
          1);
    CHECK(call({"synth", "--out", out.string(), "--seed", "-3"}).code == 1);

    {
      std::ofstream bad(out / "bad.csv");
      bad << "sample_id,experiment_id,subject_id,label,role,f0\na,E,s,2,source,1\n";
    }
    const Result r = call({"fit", "--out", out.string(), "--data", (out / "bad.csv").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("line 2") != std::string::npos);
    CHECK(call({"fit", "--out", out.string(), "--data", (out / "missing.csv").string()}).code == 2);

    const Result s = call({"fit", "--out", out.string(), "--data", data_arg(), "--tol", "1e-300"});
    CHECK(s.code == 3);
    CHECK(s.err.find('\n') == s.err.size() - 1);
  }

  TEST_CASE("the installed binary behaves like the library entry point") {
    const fs::path out = scratch("binary");
    const std::string cmd = std::string(DISVM_BINARY) + " synth --d 4 --out " + out.string() +
                            " > " + (out / "stdout.txt").string();
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(out / "A.csv"));
    const std::string bad = std::string(DISVM_BINARY) + " nonsense 2> /dev/null";
    const int status = std::system(bad.c_str());
    CHECK(WEXITSTATUS(status) == 1);
  }

  TEST_CASE("helpers") {
    CHECK(disvm::cli::fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(disvm::cli::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(disvm::cli::mean_pm_std(0.781, 0.023) == "78.1±2.3");
    const auto cfg = disvm::cli::parse_config("a = 1\n# x\n b=two # tail\n\n");
    CHECK(cfg.at("a") == "1");
    CHECK(cfg.at("b") == "two");
    CHECK(disvm::cli::canonical(cfg) == "a=1\nb=two\n");
    CHECK_THROWS_AS(disvm::cli::parse_config("novalue\n"), disvm::InvalidArgument);
  }
}
