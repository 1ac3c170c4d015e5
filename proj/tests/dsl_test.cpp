#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace prochern;
using namespace prochern::dsl;
using testsupport::table_L;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::filesystem::path> corpus_files() {
  std::vector<std::filesystem::path> out;
  for (const auto& entry :
       std::filesystem::directory_iterator(PROCHERN_CORPUS_DIR))
    if (entry.path().extension() == ".pcn") out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

TEST_CASE("parsing the basic forms") {
  SUBCASE("a single atom") {
    const auto doc = parse("atom K euler 4\n");
    REQUIRE(doc.atoms.size() == 1);
    CHECK(doc.atoms[0].name == "K");
    CHECK(doc.atoms[0].euler == 4);
    CHECK(doc.table->contains("L"));
  }
  SUBCASE("a two-strata variety") {
    const auto doc =
        parse("variety P1 { stratum a class 1; stratum b class L }");
    REQUIRE(doc.varieties.size() == 1);
    CHECK(doc.varieties[0].model->size() == 2);
    CHECK(doc.varieties[0].model->chi() == 2);
  }
  SUBCASE("declarations spanning lines inside braces") {
    const auto doc = parse(
        "variety V {\n  stratum a class 1;\n  stratum b class L\n}\n");
    CHECK(doc.varieties.size() == 1);
  }
  SUBCASE("comments are skipped") {
    const auto doc = parse("# heading\natom Z euler 1 # trailing\n");
    CHECK(doc.atoms.size() == 1);
  }
}

TEST_CASE("parse errors carry locations") {
  auto expect_error_at = [](const char* text, int line) {
    try {
      parse(text);
      FAIL_CHECK("expected ParseError for: " << text);
    } catch (const ParseError& e) {
      CHECK(e.loc().line == line);
      CHECK(e.loc().col >= 1);
    }
  };
  expect_error_at("nonsense\n", 1);
  expect_error_at("atom X\n", 1);
  expect_error_at("variety V { stratum a class Q }\n", 1);
  expect_error_at("variety V { stratum a class 1 }\nquery chi missing\n", 2);
  expect_error_at("variety V { stratum a class 1 }\nvariety V { stratum b class 1 }\n", 2);
  expect_error_at("tower T = spiral(X)\n", 1);
  expect_error_at("atom L euler 2\n", 1);
  expect_error_at("variety V { stratum a class 1 } trailing\n", 1);
  expect_error_at("query chi one(\x01)\n", 1);
}

TEST_CASE("round-trip on the corpus") {
  const auto files = corpus_files();
  REQUIRE(files.size() == 20);
  for (const auto& path : files) {
    CAPTURE(path.string());
    const std::string text = slurp(path);
    const Document doc = parse(text);
    const std::string rendered = render(doc);
    const Document again = parse(rendered);
    CHECK(document_equal(doc, again));
    // canonical rendering is a fixed point
    CHECK(render(again) == rendered);
  }
}

TEST_CASE("evaluation is deterministic for a fixed seed") {
  const auto files = corpus_files();
  for (const auto& path : files) {
    CAPTURE(path.string());
    const Document doc = parse(slurp(path));
    EvalOptions options;
    options.seed = 1234;
    options.depth = 3;
    options.horizon = 6;
    const Report a = evaluate(doc, options);
    const Report b = evaluate(doc, options);
    CHECK(render_text(a) == render_text(b));
    CHECK(render_json(a) == render_json(b));
  }
}

TEST_CASE("corpus checks pass") {
  for (const auto& path : corpus_files()) {
    CAPTURE(path.string());
    const Document doc = parse(slurp(path));
    EvalOptions options;
    options.seed = 5;
    options.depth = 3;
    options.horizon = 6;
    const Report report = evaluate(doc, options);
    for (const auto& c : report.checks) {
      CAPTURE(c.name);
      CHECK(c.pass);
    }
  }
}

TEST_CASE("pinned query values") {
  const char* text =
      "variety P1 { stratum pt class 1; stratum cell class L }\n"
      "tower T = product(P1)\n"
      "tower A = arcs(P1, dim=1)\n"
      "profn a on T level 1 { pt : 3, cell : -1 }\n"
      "query chipro one(T)\n"
      "query measure cyl(A, 0, all)\n"
      "query integrate chi a f=square p=fibers\n";
  const Report report = evaluate(parse(text), {});
  REQUIRE(report.queries.size() == 3);
  CHECK(report.queries[0].value == "2/1");
  CHECK(report.queries[1].value == "1 + L");
  CHECK(report.queries[2].value == "10/1");
}

TEST_CASE("evaluation errors carry the declaration name") {
  // gamma_pro on a product tower with several fiber classes is undefined
  const char* text =
      "variety P1 { stratum pt class 1; stratum cell class L }\n"
      "tower T = product(P1)\n"
      "profn a on T level 2 { pt.pt : 1 }\n"
      "query gammapro a\n";
  try {
    evaluate(parse(text), {});
    FAIL("expected EvalError");
  } catch (const EvalError& e) {
    CHECK(e.decl() == "gammapro a");
  }
}

TEST_CASE("fuzzing the parser never crashes it") {
  Rng rng(2026);
  const std::string alphabet =
      "abzLE019 {}();:,^*+-/#=.\n\t\"\\\x01\xff atom variety tower query";
  int parsed = 0;
  for (int i = 0; i < 2000; ++i) {
    const int len = static_cast<int>(rng.range(0, 160));
    std::string text;
    for (int j = 0; j < len; ++j)
      text += alphabet[static_cast<size_t>(
          rng.range(0, static_cast<long long>(alphabet.size()) - 1))];
    try {
      parse(text);
      ++parsed;
    } catch (const ParseError& e) {
      // expected for almost everything; every diagnostic carries a location
      CHECK(e.loc().line >= 1);
      CHECK(e.loc().col >= 1);
    }
  }
  CHECK(parsed >= 0); // reaching here means no crash and no foreign exception
}

TEST_CASE("fuzzing mutated corpus documents never crashes the parser") {
  Rng rng(4099);
  std::vector<std::string> texts;
  for (const auto& path : corpus_files()) texts.push_back(slurp(path));
  for (int i = 0; i < 500; ++i) {
    std::string text = texts[static_cast<size_t>(
        rng.range(0, static_cast<long long>(texts.size()) - 1))];
    const int edits = static_cast<int>(rng.range(1, 6));
    for (int j = 0; j < edits && !text.empty(); ++j) {
      const size_t at = static_cast<size_t>(
          rng.range(0, static_cast<long long>(text.size()) - 1));
      switch (rng.range(0, 2)) {
        case 0: text[at] = static_cast<char>(rng.range(1, 126)); break;
        case 1: text.erase(at, 1); break;
        default:
          text.insert(at, 1, static_cast<char>(rng.range(32, 126)));
          break;
      }
    }
    try {
      parse(text);
    } catch (const ParseError& e) {
      CHECK(e.loc().line >= 1);
    }
  }
}

TEST_CASE("fmt normalizes whitespace and value spelling") {
  const char* messy =
      "variety   P1 {stratum pt class 001 ;stratum cell class 1*L}\n"
      "tower T=product( P1 )\n"
      "query    chipro one(T)\n";
  const auto doc = parse(messy);
  const std::string rendered = render(doc);
  CHECK(rendered ==
        "variety P1 { stratum pt class 1; stratum cell class L }\n"
        "tower T = product(P1)\n"
        "query chipro one(T)\n");
}

TEST_CASE("checks-only evaluation skips queries") {
  const char* text =
      "variety P1 { stratum pt class 1; stratum cell class L }\n"
      "tower T = product(P1)\n"
      "query chipro one(T)\n"
      "check system T depth 3\n";
  EvalOptions options;
  options.checks_only = true;
  const Report report = evaluate(parse(text), options);
  CHECK(report.queries.empty());
  REQUIRE(report.checks.size() == 1);
  CHECK(report.checks[0].pass);
}
