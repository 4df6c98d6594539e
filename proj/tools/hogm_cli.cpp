// hogm: run a JSON scenario or a verification suite.
//   exit 0 success, 1 failed checks, 2 bad input, 3 numerical failure.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hogm/scenario.hpp"

namespace fs = std::filesystem;
using hogm::scenario::json;

namespace {

constexpr int kOk = 0, kChecksFailed = 1, kBadInput = 2, kNumerical = 3;

json load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hogm::InputError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw hogm::InputError(path + ": invalid JSON (byte " + std::to_string(e.byte) + ")");
  }
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw hogm::InputError(p.string() + ": cannot write");
  out << text;
}

int emit(const json& s, const hogm::scenario::Output& out) {
  const fs::path dir = s.value("output", std::string("hogm_out"));
  fs::create_directories(dir);
  write_file(dir / "trajectory.csv", hogm::scenario::to_csv(out));
  write_file(dir / "summary.json", out.summary.dump(2) + "\n");
  std::cout << "wrote " << (dir / "trajectory.csv").string() << " and " << (dir / "summary.json").string() << "\n";
  if (out.summary.contains("monitors")) std::cout << "monitors: " << out.summary["monitors"].dump() << "\n";
  return kOk;
}

int print_checks(const hogm::scenario::Output& out) {
  bool ok = true;
  for (const auto& c : out.summary.at("checks")) {
    const bool pass = c.at("pass").get<bool>();
    ok = ok && pass;
    std::printf("%s %-8s %-55s %.3e %s %.1e\n", pass ? "PASS" : "FAIL", c.at("suite").get<std::string>().c_str(),
                c.at("check").get<std::string>().c_str(), c.at("value").get<double>(),
                c.at("op").get<std::string>().c_str(), c.at("tolerance").get<double>());
  }
  std::printf("%s\n", ok ? "all checks passed" : "some checks failed");
  return ok ? kOk : kChecksFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Higher-order geometric mechanics: Euler-Poincare, Ostrogradsky and bundle dynamics"};
  app.require_subcommand(1);

  std::string file;
  bool dump = false;
  std::optional<double> dt, T;
  std::optional<std::string> output;
  auto* run = app.add_subcommand("run", "Run a JSON scenario");
  run->add_option("file", file, "Scenario file")->required();
  run->add_flag("--dump-config", dump, "Print the normalized scenario and exit");
  run->add_option("--output", output, "Output directory (overrides the scenario)");
  run->add_option("--dt", dt, "Time step (overrides the scenario)")->check(CLI::PositiveNumber);
  run->add_option("--T", T, "Horizon (overrides the scenario)")->check(CLI::PositiveNumber);

  std::string suite;
  std::uint64_t seed = 42;
  auto* ver = app.add_subcommand("verify", "Run a verification suite");
  ver->add_option("suite", suite, "Suite: all, algebra, ep, olp, bundle, solvers")->required();
  ver->add_option("--seed", seed, "Random seed");
  ver->add_option("--output", output, "Also write checks as CSV and JSON to this directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const json s = hogm::scenario::normalize(load(file), {dt, T, output});
      if (dump) {
        std::cout << s.dump(2) << "\n";
        return kOk;
      }
      const auto out = hogm::scenario::run(s);
      if (s.at("kind") == "verify") {
        const int rc = print_checks(out);
        emit(s, out);
        return rc;
      }
      return emit(s, out);
    }
    json s = {{"kind", "verify"}, {"suite", suite}, {"seed", seed}};
    s = hogm::scenario::normalize(s, {std::nullopt, std::nullopt, output});
    const auto out = hogm::scenario::run(s);
    const int rc = print_checks(out);
    if (output) emit(s, out);
    return rc;
  } catch (const hogm::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kBadInput;
  } catch (const hogm::HyperregularityError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kBadInput;
  } catch (const hogm::DegeneracyError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kBadInput;
  } catch (const json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kBadInput;
  } catch (const hogm::DivergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const hogm::NonConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const hogm::CutLocusError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
}
