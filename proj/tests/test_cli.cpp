#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "agimstl/trace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Cli {
  fs::path tool{AGIMSTL_TOOL_PATH};
  fs::path configs{AGIMSTL_CONFIG_DIR};
  fs::path tmp;

  Cli() {
    tmp = fs::temp_directory_path() / ("agimstl_cli_" + std::to_string(::getpid()));
    fs::create_directories(tmp);
  }

  int run(const std::string& args, const std::string& tag) const {
    std::string cmd = "\"" + tool.string() + "\" " + args + " > \"" +
                      (tmp / (tag + ".out")).string() + "\" 2> \"" +
                      (tmp / (tag + ".err")).string() + "\"";
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
  }

  std::string slurp(const std::string& tag, const char* ext = ".out") const {
    std::ifstream in(tmp / (tag + ext));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  json out_json(const std::string& tag) const { return json::parse(slurp(tag)); }

  fs::path write(const std::string& name, const std::string& content) const {
    fs::path p = tmp / name;
    std::ofstream out(p);
    out << content;
    return p;
  }
};

const Cli& cli() {
  static Cli instance;
  return instance;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("monitor reports equal traditional scores but split agim scores") {
  const Cli& c = cli();
  std::string common = " --trace-placeholder";
  (void)common;

  int rc1 = c.run("monitor --formula " + q(c.configs / "phi_step.stl") + " --trace " +
                      q(c.configs / "step_narrow.csv") +
                      " --bounds s=0:2 --semantics traditional",
                  "mon_trad_narrow");
  int rc2 = c.run("monitor --formula " + q(c.configs / "phi_step.stl") + " --trace " +
                      q(c.configs / "step_wide.csv") +
                      " --bounds s=0:2 --semantics traditional",
                  "mon_trad_wide");
  CHECK(rc1 == 0);
  CHECK(rc2 == 0);
  json t1 = c.out_json("mon_trad_narrow");
  json t2 = c.out_json("mon_trad_wide");
  CHECK(t1["verdict"] == "Satisfied");
  double r1 = t1["score"].get<double>();
  double r2 = t2["score"].get<double>();
  CHECK(std::fabs(r1 - r2) < 1e-9);
  CHECK(std::fabs(r1 - 0.3) < 1e-9);

  int ra1 = c.run("monitor --formula " + q(c.configs / "phi_step.stl") + " --trace " +
                      q(c.configs / "step_narrow.csv") + " --bounds s=0:2 --semantics agim",
                  "mon_agim_narrow");
  int ra2 = c.run("monitor --formula " + q(c.configs / "phi_step.stl") + " --trace " +
                      q(c.configs / "step_wide.csv") + " --bounds s=0:2 --semantics agim",
                  "mon_agim_wide");
  CHECK(ra1 == 0);
  CHECK(ra2 == 0);
  double e1 = c.out_json("mon_agim_narrow")["score"].get<double>();
  double e2 = c.out_json("mon_agim_wide")["score"].get<double>();
  CHECK(e1 > 0.0);
  CHECK(e2 >= 2.0 * e1);

  // The report carries one entry per subformula.
  json subs = c.out_json("mon_agim_narrow")["subformulae"];
  CHECK(subs.size() == 2);  // F node + predicate
}

TEST_CASE("monitor exit codes cover the verdicts") {
  const Cli& c = cli();
  fs::path ramp = c.write("ramp.csv", "time,x\n0,-1\n1,1\n");

  fs::path viol = c.write("viol.stl", "G[0,1] x <= 0.0\n");
  CHECK(c.run("monitor --formula " + q(viol) + " --trace " + q(ramp), "mon_viol") == 1);

  // The child score touches zero at the window edge: inconclusive.
  fs::path incl = c.write("incl.stl", "G[0,1] x >= -1\n");
  CHECK(c.run("monitor --formula " + q(incl) + " --trace " + q(ramp), "mon_incl") == 2);
}

TEST_CASE("monitor errors exit above two") {
  const Cli& c = cli();
  fs::path ramp = c.write("ramp2.csv", "time,x\n0,-1\n1,1\n");

  fs::path longf = c.write("long.stl", "G[0,5] x >= 0\n");
  CHECK(c.run("monitor --formula " + q(longf) + " --trace " + q(ramp), "mon_short") == 3);
  CHECK(c.slurp("mon_short", ".err").find("trace spans") != std::string::npos);

  fs::path until = c.write("until.stl", "(x >= 0) U[0,1] (x <= 0)\n");
  CHECK(c.run("monitor --formula " + q(until) + " --trace " + q(ramp), "mon_until") == 3);

  fs::path bad = c.write("bad.stl", "G[2,1] x >= 0\n");
  CHECK(c.run("monitor --formula " + q(bad) + " --trace " + q(ramp), "mon_bad") == 3);

  CHECK(c.run("monitor --formula /nonexistent.stl --trace " + q(ramp), "mon_missing") == 3);
  CHECK(c.run("monitor --no-such-flag", "mon_usage") == 3);
}

TEST_CASE("falsify writes the full artifact set") {
  const Cli& c = cli();
  fs::path dir = c.tmp / "fals";
  int rc = c.run("falsify --formula " + q(c.configs / "phi_falsify.stl") + " --model-config " +
                     q(c.configs / "transmission.json") +
                     " --budget 60 --restarts 2 --seed 3 --out-dir " + q(dir),
                 "fals");
  CHECK(rc == 0);  // goal achieved
  for (const char* name : {"summary.json", "best_trace.csv", "best_control.csv", "eval_log.csv"})
    CHECK(fs::exists(dir / name));

  std::ifstream in(dir / "summary.json");
  json summary = json::parse(in);
  CHECK(summary["verdict"] == "Violated");
  CHECK(summary["best_score"].get<double>() < 0.0);
  CHECK(summary["evaluations"].get<int>() == 60);

  agim::Trace best = agim::Trace::read_csv(dir / "best_trace.csv");
  CHECK(best.names() == std::vector<std::string>{"speed", "rpm"});
  CHECK(best.end_time() == doctest::Approx(30.0));

  // The eval log has a header plus one line per evaluation.
  std::ifstream log(dir / "eval_log.csv");
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) ++lines;
  CHECK(lines == 61);
}

TEST_CASE("config errors name the missing key") {
  const Cli& c = cli();
  fs::path badcfg = c.write("bad_model.json", R"({"model": "transmission", "T": 30})");
  int rc = c.run("falsify --formula " + q(c.configs / "phi_falsify.stl") + " --model-config " +
                     q(badcfg) + " --out-dir " + q(c.tmp / "bad"),
                 "fals_bad");
  CHECK(rc == 3);
  CHECK(c.slurp("fals_bad", ".err").find("Ts") != std::string::npos);
}

TEST_CASE("synth reaches the formation target region") {
  const Cli& c = cli();
  fs::path dir = c.tmp / "synth_formation";
  int rc = c.run("synth --formula " + q(c.configs / "phi_formation_reach.stl") +
                     " --model-config " + q(c.configs / "formation_synth.json") +
                     " --budget 400 --restarts 2 --seed 1 --out-dir " + q(dir),
                 "synth_form");
  CHECK(rc == 0);
  std::ifstream in(dir / "summary.json");
  json summary = json::parse(in);
  CHECK(summary["verdict"] == "Satisfied");
  CHECK(summary["best_score"].get<double>() > 0.0);
  CHECK(summary["cross_check_rho"].get<double>() > 0.0);
}

TEST_CASE("summaries are byte-identical across reruns modulo timing") {
  const Cli& c = cli();
  auto run_once = [&](const std::string& tag) {
    fs::path dir = c.tmp / tag;
    int rc = c.run("falsify --formula " + q(c.configs / "phi_falsify.stl") + " --model-config " +
                       q(c.configs / "transmission.json") +
                       " --budget 40 --restarts 2 --seed 5 --out-dir " + q(dir),
                   tag);
    CHECK(rc == 0);
    std::ifstream in(dir / "summary.json");
    json j = json::parse(in);
    j.erase("wall_ms");
    return j.dump();
  };
  CHECK(run_once("det_a") == run_once("det_b"));
}

TEST_CASE("export emits one sign-faithful column per requested subformula") {
  const Cli& c = cli();
  fs::path dir = c.tmp / "synth_formation";  // produced above
  REQUIRE(fs::exists(dir / "best_trace.csv"));

  std::string bounds =
      " --bounds x1=-20:30 --bounds y1=-20:30 --bounds x2=-20:30 --bounds y2=-20:30"
      " --bounds x3=-20:30 --bounds y3=-20:30";
  fs::path curves = c.tmp / "curves.csv";
  // Subformula 2 is the reach-box conjunction for agent 1 (pre-order: root
  // And = 0, F node = 1, its conjunction = 2).
  int rc = c.run("export --formula " + q(c.configs / "phi_formation_reach.stl") + " --trace " +
                     q(dir / "best_trace.csv") + bounds +
                     " --window 0:12 --step 0.1 --subformulae 2 --out " + q(curves),
                 "export");
  CHECK(rc == 0);

  agim::Trace curve = agim::Trace::read_csv(curves);
  CHECK(curve.dims() == 1);
  agim::Trace raw = agim::Trace::read_csv(dir / "best_trace.csv");
  std::size_t xi = raw.index_of("x1"), yi = raw.index_of("y1");
  int checked = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    double t = curve.times()[i];
    double x = raw.sample_component(xi, t);
    double y = raw.sample_component(yi, t);
    // Geometric containment in the raw [5,7] x [2,4] box, with a margin so
    // boundary-grazing instants are not judged.
    double margin = std::min(std::min(x - 5.0, 7.0 - x), std::min(y - 2.0, 4.0 - y));
    if (std::fabs(margin) < 0.1) continue;
    ++checked;
    if (margin > 0.0) CHECK(curve.samples()[i][0] > 0.0);
    if (margin < 0.0) CHECK(curve.samples()[i][0] < 0.0);
  }
  CHECK(checked > 50);

  // Column count follows the request (two region conjunctions, horizon 0).
  fs::path curves2 = c.tmp / "curves2.csv";
  int rc2 = c.run("export --formula " + q(c.configs / "phi_formation_reach.stl") + " --trace " +
                      q(dir / "best_trace.csv") + bounds +
                      " --window 0:11 --step 0.5 --subformulae 2,8 --out " + q(curves2),
                  "export2");
  CHECK(rc2 == 0);
  std::ifstream in(curves2);
  std::string header;
  std::getline(in, header);
  CHECK(std::count(header.begin(), header.end(), '"') == 4);  // two quoted names

  // A constant trace exports constant columns.
  fs::path const_trace = c.write("const.csv", "time,x1\n0,6\n6,6\n12,6\n");
  fs::path const_formula = c.write("const.stl", "G[0,2] x1 >= 0.0\n");
  fs::path curves3 = c.tmp / "curves3.csv";
  int rc3 = c.run("export --formula " + q(const_formula) + " --trace " + q(const_trace) +
                      " --bounds x1=-20:30 --window 0:10 --step 0.5 --subformulae 1 --out " +
                      q(curves3),
                  "export3");
  CHECK(rc3 == 0);
  agim::Trace c3 = agim::Trace::read_csv(curves3);
  for (std::size_t i = 0; i < c3.size(); ++i) {
    for (std::size_t col = 0; col < c3.dims(); ++col)
      CHECK(c3.samples()[i][col] == c3.samples()[0][col]);
  }
}
