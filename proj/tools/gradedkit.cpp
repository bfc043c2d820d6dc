#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "gradedkit/commands.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw gk::CommandError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact verification of graded geometric structures", "gradedkit"};
  std::string cmd;
  std::vector<std::string> files;
  std::string format = "json";
  gk::Flags flags;

  app.add_option("command", cmd, "verify | ce | normalize | convert | dirac | transfer")
      ->required()
      ->check(CLI::IsMember(gk::command_names()));
  app.add_option("files", files, "document, and a companion document for binary commands")->required()->expected(1, 2);
  app.add_option("--mode", flags.mode, "nondegeneracy mode")->check(CLI::IsMember({"strict", "sampled"}));
  app.add_option("--seed", flags.seed, "seed for sample points")->capture_default_str();
  app.add_option("--samples", flags.samples, "number of random sample points")->capture_default_str()->check(CLI::NonNegativeNumber);
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"json", "text"}));
  app.add_flag("--roundtrip", flags.roundtrip, "convert back and diff against the input");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  int current = 0;
  try {
    gk::dsl::Document d = gk::dsl::parse(slurp(files[0]));
    std::optional<gk::dsl::Document> d2;
    if (files.size() > 1) {
      current = 1;
      d2 = gk::dsl::parse(slurp(files[1]));
      current = 0;
    }
    gk::Report r = gk::run_command(cmd, d, d2 ? &*d2 : nullptr, flags);
    std::cout << gk::emit_report(r, format);
    return r.pass() ? 0 : 1;
  } catch (const gk::dsl::ParseError& e) {
    std::cerr << gk::dsl::format_error(e, files[std::max(current, e.document)]) << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "gradedkit: " << e.what() << "\n";
    return 2;
  }
}
