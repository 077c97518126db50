#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mispec/io/io.hpp"

int main(int argc, char** argv) {
  using namespace mispec;
  CLI::App app{"Tests whether a prior and a distribution of posteriors admit a misspecified Bayesian rationalization."};
  app.require_subcommand(1, 1);

  io::RunOptions opt;
  std::string input;
  std::string mode, partition = "trivial", centering = "centered";

  for (const auto& name : io::commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("input", input, name == "aggregate" ? "belief panel CSV" : "instance JSON")->required();
    sub->add_option("--mode", mode, "rational or float")->check(CLI::IsMember({"rational", "float"}));
    sub->add_option("--output,-o", opt.output, "write the report to this file");
    sub->add_option("--plot-data", opt.plot_data, "write density curves as CSV");
    if (name == "check" || name == "rationalize" || name == "simulate")
      sub->add_option("--partition", partition, "trivial or singleton")->check(CLI::IsMember({"trivial", "singleton"}));
    if (name == "check" || name == "partition") {
      sub->add_option("--width", opt.width, "partition cell width")->check(CLI::PositiveNumber);
      sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::Range(1u, 256u));
    }
    if (name == "verify" || name == "simulate") sub->add_option("--model", opt.model_path, "subjective model JSON");
    if (name == "diagnostic") {
      sub->add_option("--theta", opt.theta, "diagnosticity bias")->check(CLI::NonNegativeNumber);
      sub->add_option("--centering", centering, "centered or literal")->check(CLI::IsMember({"centered", "literal"}));
    }
    if (name == "simulate") {
      sub->add_option("--draws", opt.draws, "Monte Carlo draws")->check(CLI::PositiveNumber);
      sub->add_option("--seed", opt.seed, "RNG seed");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : io::kExitInput;
  }

  if (!mode.empty()) opt.mode = io::parse_mode(mode);
  opt.partition = partition == "singleton" ? PartitionKind::Singleton : PartitionKind::Trivial;
  opt.centering = centering == "literal" ? Centering::Literal : Centering::Centered;

  auto res = io::run(app.get_subcommands().front()->get_name(), input, opt);
  if (!opt.output) std::cout << res.out;
  std::cerr << res.err;
  return res.exit_code;
}
