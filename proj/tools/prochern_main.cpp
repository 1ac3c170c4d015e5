#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "prochern/dsl.hpp"

namespace {

// Exit codes: 0 all good, 1 check failure, 2 input error.
constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInputError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw prochern::Error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_eval(const std::string& path, const prochern::dsl::EvalOptions& options,
             const std::string& format) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const prochern::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  try {
    const auto start = std::chrono::steady_clock::now();
    const auto doc = prochern::dsl::parse(text);
    const auto report = prochern::dsl::evaluate(doc, options);
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    if (format == "json")
      std::cout << prochern::dsl::render_json(report);
    else
      std::cout << prochern::dsl::render_text(report);
    // Timing goes to stderr: the report body stays byte-identical per seed.
    std::cerr << "# elapsed " << elapsed.count() << " ms\n";
    return report.all_pass() ? kExitOk : kExitCheckFailed;
  } catch (const prochern::dsl::ParseError& e) {
    std::cerr << path << ":" << e.loc().line << ":" << e.loc().col
              << ": error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const prochern::dsl::EvalError& e) {
    std::cerr << path << ": error in '" << e.decl() << "': " << e.what() << "\n";
    return kExitInputError;
  } catch (const prochern::Error& e) {
    std::cerr << path << ": error: " << e.what() << "\n";
    return kExitInputError;
  }
}

int run_fmt(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const prochern::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  try {
    std::cout << prochern::dsl::render(prochern::dsl::parse(text));
    return kExitOk;
  } catch (const prochern::dsl::ParseError& e) {
    std::cerr << path << ":" << e.loc().line << ":" << e.loc().col
              << ": error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const prochern::Error& e) {
    std::cerr << path << ": error: " << e.what() << "\n";
    return kExitInputError;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact calculus of constructible functions on towers of "
               "stratified variety models"};
  app.require_subcommand(1);

  std::string file;
  std::string format = "text";
  prochern::dsl::EvalOptions options;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("file", file, "input document")->required();
    cmd->add_option("--seed", options.seed, "seed for property checks");
    cmd->add_option("--depth", options.depth, "default check depth");
    cmd->add_option("--horizon", options.horizon, "default equality horizon");
    cmd->add_option("--format", format, "report format (text|json)")
        ->check(CLI::IsMember({"text", "json"}));
  };

  CLI::App* eval = app.add_subcommand("eval", "evaluate queries and checks");
  add_common(eval);
  CLI::App* check = app.add_subcommand("check", "run checks only");
  add_common(check);
  CLI::App* fmt = app.add_subcommand("fmt", "canonical re-render");
  fmt->add_option("file", file, "input document")->required();

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand(fmt)) return run_fmt(file);
  options.checks_only = app.got_subcommand(check);
  return run_eval(file, options, format);
}
