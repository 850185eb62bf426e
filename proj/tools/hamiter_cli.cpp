// hamiter: run scenarios, list the germ corpus, turn reports into plot data.
//
// Exit codes: 0 all gates pass, 1 an invariant gate failed (or a module error
// stopped a task), 2 usage or parse error.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hamiter/corpus.hpp"
#include "hamiter/parallel.hpp"
#include "hamiter/scenario.hpp"
#include "hamiter/serialize.hpp"

namespace fs = std::filesystem;
using namespace hamiter;

namespace {

constexpr int kPass = 0, kFail = 1, kUsage = 2;

int cmd_run(const std::string& scenario_path, const std::string& out_dir, std::optional<std::uint64_t> seed) {
  Scenario sc = load_scenario(scenario_path);
  if (seed) sc.seed = *seed;
  const fs::path out = out_dir.empty() ? fs::path("hamiter-out") / sc.name : fs::path(out_dir);
  RunResult rr = run_scenario(sc, out);
  for (const auto& t : rr.tasks) {
    if (!t.ok) std::cout << "[ERROR] " << t.task << ": " << t.error << "\n";
    for (const auto& c : t.checks)
      std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << t.task << ": " << c.name << " (" << c.ref << ")"
                << (c.detail.empty() ? "" : " " + c.detail) << "\n";
  }
  std::cout << (rr.pass ? "PASS" : "FAIL") << "  summary: " << (out / "summary.json").string() << "\n";
  return rr.pass ? kPass : kFail;
}

int cmd_corpus(const std::string& name, const std::string& out_dir) {
  Json list = Json::array();
  auto describe = [&](const CorpusEntry& e) {
    Json params = Json::object();
    for (const auto& [k, v] : e.defaults) params[k] = v;
    list.push_back({{"name", e.name}, {"n", e.n}, {"formula", e.formula}, {"defaults", params}});
    std::cout << e.name << "  (n = " << e.n << ")  " << e.formula;
    for (const auto& [k, v] : e.defaults) std::cout << "  " << k << "=" << v;
    std::cout << "\n";
  };
  if (!name.empty())
    describe(corpus_entry(name));
  else
    for (const auto& e : corpus()) describe(e);
  if (!out_dir.empty()) write_text(fs::path(out_dir) / "corpus.json", list.dump(2) + "\n");
  return kPass;
}

std::string unique_name(std::map<std::string, int>& used, const std::string& base) {
  int& n = used[base];
  return n++ == 0 ? base : base + "_" + std::to_string(n);
}

int cmd_plots(const std::vector<std::string>& inputs, const std::string& out_dir) {
  std::vector<fs::path> reports;
  for (const auto& in : inputs) {
    fs::path p(in);
    if (fs::is_directory(p)) {
      for (const char* f : {"persistence.json", "gaps.json"})
        if (fs::exists(p / f)) reports.push_back(p / f);
    } else if (fs::exists(p)) {
      reports.push_back(p);
    } else {
      throw Error(Errc::MissingReport, "no such report: " + in);
    }
  }
  if (reports.empty()) throw Error(Errc::MissingReport, "no persistence or gap reports given");
  const fs::path out = out_dir.empty() ? fs::path("plots") : fs::path(out_dir);
  std::map<std::string, int> used;
  int written = 0;
  for (const auto& path : reports) {
    Json j;
    try {
      j = Json::parse(read_text(path));
    } catch (const Json::exception& e) {
      throw Error(Errc::ParseError, path.string() + ": " + e.what());
    }
    const std::string stem = path.stem().string();
    const auto& rows = j.contains("rows") ? j["rows"] : Json::array();
    if (!rows.empty() && rows[0].contains("s_k")) {
      const double delta = j.value("delta", 0.0);
      std::ostringstream sk, slope;
      sk << "# k s_k\n";
      slope << "# k s_k/k delta\n";
      for (const auto& r : rows) {
        if (r["s_k"].is_null()) continue;
        const int k = r["k"].get<int>(), s = r["s_k"].get<int>();
        sk << k << ' ' << s << '\n';
        slope << k << ' ' << static_cast<double>(s) / k << ' ' << delta << '\n';
      }
      const auto base = unique_name(used, stem);
      write_text(out / (base + "_sk.dat"), sk.str());
      write_text(out / (base + "_slope.dat"), slope.str());
      written += 2;
    } else if (!rows.empty() && rows[0].contains("gamma")) {
      std::map<std::pair<int, int>, std::vector<std::pair<int, double>>> pairs;
      for (const auto& r : rows) pairs[{r["i"].get<int>(), r["j"].get<int>()}].push_back({r["k"].get<int>(), r["gamma"].get<double>()});
      std::ostringstream g;
      for (const auto& [ij, pts] : pairs) {
        g << "# pair " << ij.first << ' ' << ij.second << "\n# k gamma\n";
        for (const auto& [k, gamma] : pts) g << k << ' ' << gamma << '\n';
        g << "\n\n";
      }
      write_text(out / (unique_name(used, stem) + "_gamma.dat"), g.str());
      ++written;
    } else {
      throw Error(Errc::MissingReport, path.string() + " is neither a persistence report nor a gap table");
    }
  }
  std::cout << written << " plot file(s) in " << out.string() << "\n";
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iteration of isolated periodic orbits: local Floer persistence checks"};
  app.require_subcommand(1);
  int jobs = 1;
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1, 256));

  auto* run = app.add_subcommand("run", "run a scenario file");
  std::string scenario, out;
  std::optional<std::uint64_t> seed;
  run->add_option("--scenario", scenario, "scenario file")->required();
  run->add_option("--out", out, "output directory");
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1, 256));

  auto* corpus_cmd = app.add_subcommand("corpus", "list the germ corpus");
  std::string name, corpus_out;
  corpus_cmd->add_option("name", name, "show a single entry");
  corpus_cmd->add_option("--out", corpus_out, "also write corpus.json here");

  auto* plots = app.add_subcommand("plots", "columnar plot data from reports");
  std::vector<std::string> inputs;
  std::string plots_out;
  plots->add_option("reports", inputs, "report files or run directories");
  plots->add_option("--out", plots_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  set_jobs(jobs);
  try {
    if (*run) return cmd_run(scenario, out, seed);
    if (*corpus_cmd) return cmd_corpus(name, corpus_out);
    if (*plots) return cmd_plots(inputs, plots_out);
  } catch (const Error& e) {
    std::cerr << "hamiter: " << e.what() << "\n";
    const Errc c = e.code();
    return c == Errc::ParseError || c == Errc::UnknownFormula || c == Errc::MissingReport ||
                   c == Errc::InvalidArgument
               ? kUsage
               : kFail;
  } catch (const std::exception& e) {
    std::cerr << "hamiter: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}
