#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "grasp/json_io.hpp"
#include "grasp/rng.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("grasp_cli_test_" + std::to_string(grasp::Rng(std::random_device{}()).next_u64()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Runs the installed binary with a scrubbed GRASP_STORE so tests never pick
// up the invoking shell's store.
CliResult run_cli(const TempDir& tmp, const std::string& args) {
  static int counter = 0;
  fs::path out = tmp.path / ("stdout_" + std::to_string(counter) + ".txt");
  fs::path err = tmp.path / ("stderr_" + std::to_string(counter) + ".txt");
  ++counter;
  std::string cmd = "env -u GRASP_STORE '" + std::string(GRASP_CLI_PATH) + "' " + args + " > '" +
                    out.string() + "' 2> '" + err.string() + "'";
  int raw = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = raw == -1 ? -1 : WEXITSTATUS(raw);
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file()) out[entry.path().filename().string()] = slurp(entry.path());
  return out;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("help exits cleanly and an unknown flag does not") {
  TempDir tmp;
  CliResult help = run_cli(tmp, "--help");
  CHECK(help.exit_code == 0);
  CHECK(help.out.find("sample") != std::string::npos);
  CHECK(help.out.find("search") != std::string::npos);

  CliResult sub_help = run_cli(tmp, "train --help");
  CHECK(sub_help.exit_code == 0);
  CHECK(sub_help.out.find("--label-epoch") != std::string::npos);

  CliResult bad = run_cli(tmp, "--bogus-flag");
  CHECK(bad.exit_code == 2);
  CliResult bad_value = run_cli(tmp, "sample --count nope --out x");
  CHECK(bad_value.exit_code == 2);
}

TEST_CASE("store commands refuse to run without a store path") {
  TempDir tmp;
  CliResult r = run_cli(tmp, "store stats");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("no store given") != std::string::npos);
}

TEST_CASE("sampling is deterministic across processes") {
  TempDir tmp;
  fs::path a = tmp.path / "a";
  fs::path b = tmp.path / "b";
  CliResult ra = run_cli(tmp, "sample --count 15 --seed 5 --out '" + a.string() + "'");
  REQUIRE(ra.exit_code == 0);
  CliResult rb = run_cli(tmp, "sample --count 15 --seed 5 --out '" + b.string() + "'");
  REQUIRE(rb.exit_code == 0);
  auto ca = dir_contents(a);
  auto cb = dir_contents(b);
  CHECK(ca.size() == 15);
  CHECK(ca == cb);

  fs::path c = tmp.path / "c";
  CliResult rc = run_cli(tmp, "sample --count 15 --seed 6 --out '" + c.string() + "'");
  REQUIRE(rc.exit_code == 0);
  CHECK(dir_contents(c) != ca);
}

TEST_CASE("shape inference reports one entry per node") {
  TempDir tmp;
  fs::path dir = tmp.path / "archs";
  REQUIRE(run_cli(tmp, "sample --count 1 --seed 3 --out '" + dir.string() + "'").exit_code == 0);
  fs::path arch = fs::directory_iterator(dir)->path();
  CliResult r = run_cli(tmp, "shapes --arch '" + arch.string() + "' --input 3,32,32");
  REQUIRE(r.exit_code == 0);
  grasp::Json j = grasp::Json::parse(r.out);
  CHECK(j.at("nodes").size() >= 2);
  CHECK(j.at("nodes").at(0).at("type") == "input");
}

TEST_CASE("the store, train, eval, search, analyze pipeline runs end to end") {
  TempDir tmp;
  fs::path store = tmp.path / "store";
  fs::path archs = tmp.path / "archs";
  std::string store_flag = " --store '" + store.string() + "'";

  REQUIRE(run_cli(tmp, "store init" + store_flag).exit_code == 0);
  REQUIRE(run_cli(tmp, "sample --count 25 --seed 11 --out '" + archs.string() + "'").exit_code ==
          0);
  CliResult add = run_cli(tmp, "store add" + store_flag + " --from '" + archs.string() +
                                   "' --synthetic --profiles cifar10 fashion-mnist");
  REQUIRE(add.exit_code == 0);
  CHECK(grasp::Json::parse(add.out).at("added") == 25);

  CliResult stats = run_cli(tmp, "store stats" + store_flag);
  REQUIRE(stats.exit_code == 0);
  grasp::Json sj = grasp::Json::parse(stats.out);
  CHECK(sj.at("records") == 25);
  CHECK(sj.at("datasets").contains("cifar10"));

  fs::path model = tmp.path / "model.bin";
  CliResult train = run_cli(tmp, "train" + store_flag +
                                     " --dataset cifar10 --label-epoch 40 --seed 2"
                                     " --epochs 4 --units 12 --batch 32 --max-pairs 250"
                                     " --out '" +
                                     model.string() + "'");
  REQUIRE(train.exit_code == 0);
  REQUIRE(fs::exists(model));
  grasp::Json tj = grasp::Json::parse(train.out);
  CHECK(tj.at("n_specs") == 25);
  CHECK(tj.at("train_pairwise_accuracy").get<double>() >= 0.5);

  CliResult eval = run_cli(tmp, "eval --model '" + model.string() + "'" + store_flag);
  REQUIRE(eval.exit_code == 0);
  grasp::Json ej = grasp::Json::parse(eval.out);
  CHECK(ej.at("dataset") == "cifar10");
  CHECK(ej.at("pairwise_accuracy").get<double>() >= 0.0);

  fs::path curves = tmp.path / "curves.csv";
  CliResult analyze = run_cli(tmp, "analyze" + store_flag + " --dataset cifar10 --k 5 --out '" +
                                       curves.string() + "'");
  REQUIRE(analyze.exit_code == 0);
  std::string csv = slurp(curves);
  CHECK(first_line(csv) == "epoch,one_minus_ndcg_at_5,one_minus_ndcg_full");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 121);  // header + 120 epochs

  fs::path trace = tmp.path / "trace.csv";
  fs::path best = tmp.path / "best.json";
  CliResult search = run_cli(tmp, "search --pool 60 --iters 2 --per-iter 10 --seed 4"
                                  " --refit-epochs 1 --refit-units 12 --refit-max-pairs 150"
                                  " --trace '" +
                                      trace.string() + "' --out '" + best.string() + "'");
  REQUIRE(search.exit_code == 0);
  grasp::Json bj = grasp::Json::parse(search.out);
  CHECK(bj.at("best_acc").get<double>() > 0.0);
  CHECK(bj.at("iterations") == 2);
  std::string trace_csv = slurp(trace);
  CHECK(first_line(trace_csv) == "iteration,evaluated_count,best_acc,precision_at_10");
  CHECK(std::count(trace_csv.begin(), trace_csv.end(), '\n') == 3);
  REQUIRE(fs::exists(best));
  grasp::Json best_spec = grasp::read_json_file(best);
  CHECK(best_spec.contains("n"));
  CHECK(best_spec.contains("adjacency"));
}

TEST_CASE("cross-store analysis writes a ranking disagreement matrix") {
  TempDir tmp;
  fs::path archs = tmp.path / "archs";
  REQUIRE(run_cli(tmp, "sample --count 12 --seed 21 --out '" + archs.string() + "'").exit_code ==
          0);
  fs::path store_a = tmp.path / "store_a";
  fs::path store_b = tmp.path / "store_b";
  for (const auto& [store, profile] :
       {std::pair{store_a, "cifar10"}, std::pair{store_b, "cifar100"}}) {
    REQUIRE(run_cli(tmp, "store init --store '" + store.string() + "'").exit_code == 0);
    REQUIRE(run_cli(tmp, "store add --store '" + store.string() + "' --from '" + archs.string() +
                             "' --synthetic --profiles " + profile)
                .exit_code == 0);
  }
  fs::path matrix = tmp.path / "cross.json";
  CliResult r = run_cli(tmp, "analyze --cross '" + store_a.string() + "' '" + store_b.string() +
                                 "' --cross-out '" + matrix.string() + "'");
  REQUIRE(r.exit_code == 0);
  grasp::Json mj = grasp::read_json_file(matrix);
  CHECK(mj.at("shared_records") == 12);
  double cell = mj.at("one_minus_ndcg").at("cifar10").at("cifar100").get<double>();
  CHECK(cell >= 0.0);
  CHECK(cell <= 1.0);
}

TEST_CASE("ingest failures surface in the exit code") {
  TempDir tmp;
  fs::path store = tmp.path / "store";
  fs::path inbox = tmp.path / "inbox";
  fs::create_directories(inbox);
  REQUIRE(run_cli(tmp, "store init --store '" + store.string() + "'").exit_code == 0);
  grasp::atomic_write_file(inbox / "broken.json", "{not json");
  CliResult r = run_cli(tmp, "store ingest --store '" + store.string() + "' --from '" +
                                 inbox.string() + "'");
  CHECK(r.exit_code == 1);
  CHECK(r.out.find("failures") != std::string::npos);
}
