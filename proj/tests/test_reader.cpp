#include <doctest.h>

#include <functional>
#include <set>
#include <string>
#include <vector>

#include <sct/interp.hpp>
#include <sct/reader.hpp>

#include "helpers.hpp"

using namespace sct;
using sct::testing::corpus_path;
using sct::testing::read_corpus;

namespace {

std::string eval1(const std::string& src) {
  program p = read_program(src, "t");
  run_result r = run(p);
  REQUIRE(r.kind == outcome_kind::done);
  REQUIRE(!r.values.empty());
  return print_value(r.values.back());
}

void walk(const expr_ptr& e, const std::function<void(const expr&)>& f) {
  if (!e) return;
  f(*e);
  if (auto* lam = std::get_if<e_lam>(&e->node)) {
    walk(lam->body, f);
  } else if (auto* app = std::get_if<e_app>(&e->node)) {
    walk(app->fn, f);
    for (const expr_ptr& a : app->args) walk(a, f);
  } else if (auto* br = std::get_if<e_if0>(&e->node)) {
    walk(br->test, f);
    walk(br->then_e, f);
    walk(br->else_e, f);
  } else if (auto* tc = std::get_if<e_termc>(&e->node)) {
    walk(tc->body, f);
  }
}

std::vector<std::string> all_labels(const program& p) {
  std::vector<std::string> labels;
  auto visit = [&](const expr& e) {
    if (auto* lam = std::get_if<e_lam>(&e.node)) labels.push_back(lam->label);
  };
  for (const auto& [name, body] : p.globals) walk(body, visit);
  for (const expr_ptr& m : p.mains) walk(m, visit);
  return labels;
}

}  // namespace

TEST_SUITE("reader") {

TEST_CASE("defines, shorthand and expression forms land in the right buckets") {
  program p = read_program("(define (f x) x)\n(define g 5)\n(f g)", "t");
  CHECK(p.stem == "t");
  REQUIRE(p.globals.size() == 2);
  CHECK(p.name_of(p.globals[0].first) == "f");
  CHECK(p.name_of(p.globals[1].first) == "g");
  CHECK(p.mains.size() == 1);
  CHECK(p.global_slots.size() == 2);
}

TEST_CASE("defines may be mutually recursive regardless of order") {
  CHECK(eval1("(define (even? n) (if (= n 0) 0 (odd? (- n 1))))\n"
              "(define (odd? n) (if (= n 0) 1 (even? (- n 1))))\n"
              "(even? 10)") == "0");
}

TEST_CASE("truth is integer zero across the sugar") {
  CHECK(eval1("(if 0 1 2)") == "1");
  CHECK(eval1("(if 7 1 2)") == "2");
  CHECK(eval1("(if0 (= 1 1) 10 20)") == "10");
  CHECK(eval1("(if (not (= 1 2)) 10 20)") == "10");
  CHECK(eval1("(if (and (= 1 1) (= 2 2)) 10 20)") == "10");
  CHECK(eval1("(if (and (= 1 1) (= 2 3)) 10 20)") == "20");
  CHECK(eval1("(if (or (= 1 2) (= 2 2)) 10 20)") == "10");
  CHECK(eval1("(if (or (= 1 2) (= 2 3)) 10 20)") == "20");
  CHECK(eval1("(cond [(= 1 2) 10] [(= 2 2) 20] [else 30])") == "20");
  CHECK(eval1("(cond [(= 1 2) 10] [else 30])") == "30");
}

TEST_CASE("let binds in parallel over a lambda") {
  CHECK(eval1("(let ([x 2] [y 3]) (+ x y))") == "5");
  CHECK(eval1("(define x 1)\n(let ([x 10] [y x]) (+ x y))") == "11");
}

TEST_CASE("quotation builds lists, symbols, and characters") {
  CHECK(eval1("'(1 2 3)") == "(1 2 3)");
  CHECK(eval1("(car '(1 2))") == "1");
  CHECK(eval1("(cdr '(1 2))") == "(2)");
  CHECK(eval1("'()") == "()");
  CHECK(eval1("(empty? '())") == "0");
  CHECK(eval1("(car '(1 . 2))") == "1");
  CHECK(eval1("(cdr '(1 . 2))") == "2");
  CHECK(eval1("(= 'a 'a)") == "0");
  CHECK(eval1("(= 'a 'b)") == "1");
  CHECK(eval1("(car '(#\\a))") == "97");
  CHECK(eval1("(if (= (car '(#\\c #\\b)) #\\c) 1 2)") == "1");
}

TEST_CASE("quoted symbols intern to stable negative codes") {
  program p = read_program("(= 'foo 'bar)", "t");
  REQUIRE(p.symbol_codes.count("foo") == 1);
  REQUIRE(p.symbol_codes.count("bar") == 1);
  CHECK(p.symbol_codes.at("foo") < 0);
  CHECK(p.symbol_codes.at("bar") < 0);
  CHECK(p.symbol_codes.at("foo") != p.symbol_codes.at("bar"));
}

TEST_CASE("empty is the nil literal") {
  CHECK(eval1("empty") == "()");
  CHECK(eval1("(cons 1 empty)") == "(1)");
}

TEST_CASE("lambda labels are unique within a program and stable across reads") {
  std::string src = sct::testing::slurp(corpus_path("ev-contract.sct"));
  program a = read_program(src, "ev-contract");
  program b = read_program(src, "ev-contract");
  std::vector<std::string> la = all_labels(a), lb = all_labels(b);
  CHECK(la == lb);
  CHECK(!la.empty());
  std::set<std::string> uniq(la.begin(), la.end());
  CHECK(uniq.size() == la.size());
  for (const std::string& l : la) CHECK(!l.empty());

  // Named defines label their lambda by the name; anonymous lambdas get
  // stem:line positions.
  program anon = read_program("((lambda (x) x) 1)\n((lambda (y) y) 2)", "pos");
  std::vector<std::string> al = all_labels(anon);
  REQUIRE(al.size() == 2);
  CHECK(al[0] == "pos:1");
  CHECK(al[1] == "pos:2");
}

TEST_CASE("terminating/c defaults its tag to stem and line") {
  program p = read_program("(define f (terminating/c (lambda (x) x)))\nf", "t");
  const expr_ptr& dbody = p.globals[0].second;
  auto* dtc = std::get_if<e_termc>(&dbody->node);
  REQUIRE(dtc != nullptr);
  CHECK(dtc->blame == "t:1");
  run_result r = run(p);
  REQUIRE(r.kind == outcome_kind::done);
  CHECK(print_value(r.values[0]) == "#<term/c:f>");

  program q = read_program("(define f (terminating/c (lambda (x) x) \"mine\"))\nf", "t");
  const expr_ptr& body = q.globals[0].second;
  auto* tc = std::get_if<e_termc>(&body->node);
  REQUIRE(tc != nullptr);
  CHECK(tc->blame == "mine");
}

TEST_CASE("assume records sorted preconditions for an entry") {
  program p = read_program(
      "(define (f m n xs) m)\n(assume (f (natural m) (integer n) (list xs)))\n(f 1 2 '())",
      "t");
  auto id = p.lookup_name("f");
  REQUIRE(id.has_value());
  REQUIRE(p.assumes.count(*id) == 1);
  const auto& pre = p.assumes.at(*id);
  REQUIRE(pre.size() == 3);
  CHECK(pre[0].s == precond::sort::natural);
  CHECK(pre[0].param == "m");
  CHECK(pre[1].s == precond::sort::integer);
  CHECK(pre[2].s == precond::sort::list);
}

TEST_CASE("malformed input raises read_error with a line number") {
  CHECK_THROWS_AS(read_program("(define (f x)", "t"), read_error);
  CHECK_THROWS_AS(read_program("(f 1)", "t"), read_error);  // unbound name
  CHECK_THROWS_AS(read_program("(lambda x x)", "t"), read_error);
  CHECK_THROWS_AS(read_program(")", "t"), read_error);
  try {
    read_program("(define (f x) x)\n(define (g y)", "t");
    FAIL("expected read_error");
  } catch (const read_error& e) {
    CHECK(e.line >= 2);
  }
}

TEST_CASE("every corpus program parses") {
  const char* names[] = {"ack.sct",       "ack-buggy.sct", "omega.sct",
                         "ascend-then-stop.sct", "len-cps.sct",  "ev-contract.sct",
                         "ev-contract-ok.sct",   "nfa.sct",       "fact.sct",
                         "sum.sct",       "isort.sct",     "msort.sct",
                         "rev.sct",       "mul.sct",       "fib.sct",
                         "even-odd.sct",  "id.sct",        "fold.sct",
                         "loop-tail.sct", "interp.sct",    "interp-omega.sct"};
  for (const char* n : names) {
    CAPTURE(n);
    program p = read_corpus(n);
    CHECK(!p.mains.empty());
  }
}

TEST_CASE("read_file derives the stem from the path") {
  program p = read_corpus("ack.sct");
  CHECK(p.stem == "ack");
}

}  // TEST_SUITE
