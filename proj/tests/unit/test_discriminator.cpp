#include <functional>
#include <string>
#include <vector>

#include "../support/fixtures.hpp"
#include "doctest.h"
#include "qa/binary_io.hpp"
#include "qa/discriminator.hpp"
#include "qa/error.hpp"
#include "qa/rng.hpp"
#include "qa/score_store.hpp"
#include "qa/text_index.hpp"

using namespace qa::disc;

namespace {

std::string error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const qa::Error& e) {
    return e.kind();
  }
  return "none";
}

}  // namespace

TEST_SUITE("discriminator") {
  TEST_CASE("id lists") {
    const auto ids = parse_discriminator_list("tfd,drd,avd");
    REQUIRE(ids.size() == 3);
    CHECK(ids[2] == kAvd);
    CHECK(join(ids) == "tfd,drd,avd");
    CHECK(parse_discriminator_list("ext1").front().str() == "ext1");
    CHECK(error_kind([] { parse_discriminator_list("tfd,,avd"); }) == "config");
    CHECK(error_kind([] { parse_discriminator_list("tfd,tfd"); }) == "config");
    CHECK(error_kind([] { DiscriminatorId("has space"); }) == "config");
  }

  TEST_CASE("max_normalize") {
    CHECK(max_normalize(std::vector<double>{4, 2, 0}) == std::vector<double>{1, 0.5, 0});
    CHECK(max_normalize(std::vector<double>{0, 0}) == std::vector<double>{0, 0});
    CHECK(max_normalize(std::vector<double>{}).empty());
  }

  TEST_CASE("assemble stacks rows in the requested order") {
    const std::vector<std::string> docs{"x", "y"};
    const std::vector<ScoreRow> rows{{kAvd, docs, {0.9, 0.1}}, {kTfd, docs, {1.0, 0.5}},
                                     {kDrd, docs, {0.3, 0.4}}};
    const std::vector<DiscriminatorId> order{kTfd, kDrd, kAvd};
    const auto m = assemble_score_matrix("q1", 2, docs, rows, order);
    CHECK(m.values == qa::Matrix{{1.0, 0.5}, {0.3, 0.4}, {0.9, 0.1}});
    CHECK(m.row_ids == order);
    CHECK(m.candidate_index == 2);
    m.validate();

    const std::vector<DiscriminatorId> two{kAvd, kTfd};
    CHECK(m.select_rows(two).values == qa::Matrix{{0.9, 0.1}, {1.0, 0.5}});
  }

  TEST_CASE("assemble rejects mismatches") {
    const std::vector<std::string> docs{"x", "y"};
    const std::vector<DiscriminatorId> order{kTfd, kDrd};
    const std::vector<ScoreRow> missing{{kTfd, docs, {1, 0}}};
    CHECK(error_kind([&] { assemble_score_matrix("q", 0, docs, missing, order); }) == "validation");
    const std::vector<ScoreRow> short_row{{kTfd, docs, {1, 0}}, {kDrd, {"x"}, {1}}};
    CHECK(error_kind([&] { assemble_score_matrix("q", 0, docs, short_row, order); }) == "shape");
    const std::vector<ScoreRow> swapped{{kTfd, docs, {1, 0}}, {kDrd, {"y", "x"}, {1, 0}}};
    CHECK(error_kind([&] { assemble_score_matrix("q", 0, docs, swapped, order); }) == "validation");
  }

  TEST_CASE("validate checks range and shape") {
    ScoreMatrix m;
    m.question_id = "q";
    m.doc_ids = {"a"};
    m.row_ids = {kTfd};
    m.values = qa::Matrix{{1.5}};
    CHECK(error_kind([&] { m.validate(); }) == "validation");
    m.values = qa::Matrix{{0.5, 0.5}};
    CHECK(error_kind([&] { m.validate(); }) == "shape");
    CHECK(error_kind([&] { (void)m.select_rows(std::vector<DiscriminatorId>{kAvd}); }) == "validation");
  }

  TEST_CASE("truncation keeps the most lexically relevant columns") {
    ScoreMatrix m;
    m.question_id = "q";
    m.doc_ids = {"a", "b", "c", "d"};
    m.row_ids = {kAvd};
    m.values = qa::Matrix{{0.1, 0.2, 0.3, 0.4}};
    m.lexical = {1.0, 3.0, 2.0, 3.0};
    const auto t = m.truncate_by_lexical(2);
    CHECK(t.doc_ids == std::vector<std::string>{"b", "d"});
    CHECK(t.values == qa::Matrix{{0.2, 0.4}});
    CHECK(m.truncate_by_lexical(10).doc_count() == 4);

    m.lexical.clear();
    CHECK(m.truncate_by_lexical(2).doc_ids == std::vector<std::string>{"a", "b"});
  }

  TEST_CASE("tfd is the max-normalized lexical score") {
    const auto idx = qa::text::InvertedIndex::build({{"a", "c", "ice melts in heat", 0},
                                                     {"b", "c", "heat heat ice melts fast", 0},
                                                     {"z", "c", "nothing relevant", 0}});
    const std::vector<std::string> docs{"a", "b", "z"};
    const auto s = tfd_score(idx, "What does heat do?", "melts ice", docs);
    REQUIRE(s.size() == 3);
    const std::vector<std::string> terms{"heat", "ice", "melts"};
    const double sa = idx.score(terms, std::string_view("a"));
    const double sb = idx.score(terms, std::string_view("b"));
    const double top = std::max(sa, sb);
    CHECK(s[0] == doctest::Approx(sa / top).epsilon(1e-14));
    CHECK(s[1] == doctest::Approx(sb / top).epsilon(1e-14));
    CHECK(s[2] == 0.0);

    const qa::text::InvertedIndex* both[] = {&idx};
    const std::vector<std::string> corpora{"c", "c", "c"};
    CHECK(tfd_score(both, "What does heat do?", "melts ice", docs, corpora) == s);
    const std::vector<std::string> bad{"c", "c", "other"};
    CHECK_THROWS_AS(tfd_score(both, "What does heat do?", "melts ice", docs, bad), qa::Error);
  }
}

TEST_SUITE("score_store") {
  TEST_CASE("insert, lookup and missing counts") {
    PrecomputedScoreStore store;
    store.insert({"q1", 0, "d1", "drd"}, 0.25);
    store.insert({"q1", 0, "d1", "drd"}, 0.75);
    CHECK(store.size() == 1);
    CHECK(store.find({"q1", 0, "d1", "drd"}) == 0.75);
    CHECK_FALSE(store.find({"q1", 1, "d1", "drd"}).has_value());
    CHECK_THROWS_AS(store.insert({"q1", 0, "d2", "drd"}, 1.01), qa::Error);

    const std::vector<std::string> docs{"d1", "d9"};
    const auto hit = lookup_scores(store, "q1", 0, docs, kDrd, 0.5);
    CHECK(hit.values == std::vector<double>{0.75, 0.5});
    CHECK(hit.missing == 1);
  }

  TEST_CASE("merge lets the newer store win") {
    PrecomputedScoreStore a, b;
    a.insert({"q", 0, "d", "avd"}, 0.1);
    a.insert({"q", 0, "e", "avd"}, 0.2);
    b.insert({"q", 0, "d", "avd"}, 0.9);
    a.merge(b);
    CHECK(a.size() == 2);
    CHECK(a.find({"q", 0, "d", "avd"}) == 0.9);
  }

  TEST_CASE("round trip of 1000 records is exact") {
    fixtures::TempDir dir("scores");
    qa::Rng rng(8);
    PrecomputedScoreStore store;
    for (int i = 0; i < 1000; ++i) {
      store.insert({"q" + std::to_string(i % 37), static_cast<std::size_t>(i % 4),
                    "doc" + std::to_string(i), i % 2 ? "drd" : "avd"},
                   rng.uniform());
    }
    store.save(dir.file("s.tsv"));
    const auto back = PrecomputedScoreStore::load(dir.file("s.tsv"));
    CHECK(back == store);
    back.save(dir.file("t.tsv"));
    CHECK(qa::io::read_file(dir.file("s.tsv")) == qa::io::read_file(dir.file("t.tsv")));
  }

  TEST_CASE("bad records name their line") {
    fixtures::TempDir dir("badscores");
    const auto check = [&](const std::string& body, const std::string& kind) {
      qa::io::write_file(dir.file("b.tsv"), body);
      try {
        (void)PrecomputedScoreStore::load(dir.file("b.tsv"));
        FAIL("expected an error");
      } catch (const qa::Error& e) {
        CHECK(e.kind() == kind);
        CHECK(std::string(e.what()).find("b.tsv:2") != std::string::npos);
      }
    };
    check("q\t0\td\tdrd\t0.5\nq\t0\td\tdrd\n", "format");
    check("q\t0\td\tdrd\t0.5\nq\tx\td\tdrd\t0.5\n", "format");
    check("q\t0\td\tdrd\t0.5\nq\t0\te\tdrd\tabc\n", "format");
    check("q\t0\td\tdrd\t0.5\nq\t0\te\tdrd\t1.5\n", "validation");
  }
}
