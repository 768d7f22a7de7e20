#include "extkm/csv.hpp"
#include "extkm/errors.hpp"
#include "extkm/rng.hpp"
#include "extkm/sample.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <tuple>
#include <fstream>
#include <set>
#include <string>

using namespace extkm;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = std::string("/tmp/extkm_test_") + name;
  std::ofstream out(path);
  out << content;
  return path;
}

CensoredSample make_sample(std::vector<double> z, std::vector<int> delta, std::vector<double> x) {
  CensoredSample s;
  for (std::size_t i = 0; i < z.size(); ++i) s.push_back({z[i], delta[i], {x[i]}});
  return s;
}

} // namespace

TEST_CASE("load_csv round trip") {
  const auto path = write_temp("ok.csv", "z,delta,x\n1.0,1,0.5\n2.0,0,1.5\n3.0,1,2.5\n");
  const auto sample = load_csv(path);
  REQUIRE(sample.size() == 3);
  CHECK(sample.m == 1);
  CHECK(sample.z[1] == 2.0);
  CHECK(sample.delta[1] == 0);
  CHECK(sample.x[2] == 2.5);
}

TEST_CASE("load_csv extra columns ignored and schema renaming") {
  const auto path = write_temp("extra.csv", "id,time,status,age\n7,1.0,1,30\n8,2.0,0,40\n");
  CsvSchema schema;
  schema.z = "time";
  schema.delta = "status";
  schema.covariates = {"age"};
  const auto sample = load_csv(path, schema);
  REQUIRE(sample.size() == 2);
  CHECK(sample.x[1] == 40.0);
}

TEST_CASE("load_csv tolerates CRLF endings and padded fields") {
  const auto path = write_temp("crlf.csv", "z,delta,x\r\n1.0, 1, 0.5\r\n2.5 ,0,1.5\r\n");
  const auto sample = load_csv(path);
  REQUIRE(sample.size() == 2);
  CHECK(sample.z[1] == 2.5);
  CHECK(sample.x[0] == 0.5);
}

TEST_CASE("load_csv error contracts") {
  const auto bad_delta = write_temp("bad_delta.csv", "z,delta,x\n1,1,0\n2,0,0\n3,1,0\n4,2,0\n");
  CHECK_THROWS_WITH_AS(load_csv(bad_delta), doctest::Contains("line 5"), value_error);

  const auto bad_z = write_temp("bad_z.csv", "z,delta,x\n-1,1,0\n");
  CHECK_THROWS_AS(load_csv(bad_z), parse_error);

  const auto missing = write_temp("missing.csv", "z,delta\n1,1\n");
  CHECK_THROWS_WITH_AS(load_csv(missing), doctest::Contains("'x'"), schema_error);

  const auto garbled = write_temp("garbled.csv", "z,delta,x\nfoo,1,0\n");
  CHECK_THROWS_AS(load_csv(garbled), parse_error);
}

TEST_CASE("sort_with_concomitants basic permutation") {
  const auto sorted = sort_with_concomitants(make_sample({3, 1, 2}, {1, 0, 1}, {10, 20, 30}));
  CHECK(sorted.z_sorted == std::vector<double>{1, 2, 3});
  CHECK(sorted.delta_concomitants == std::vector<std::uint8_t>{0, 1, 1});
  CHECK(sorted.x_concomitants == std::vector<double>{20, 30, 10});
}

TEST_CASE("sort_with_concomitants tie rule: events before censorings") {
  const auto sorted = sort_with_concomitants(make_sample({2, 2}, {0, 1}, {1, 2}));
  CHECK(sorted.delta_concomitants == std::vector<std::uint8_t>{1, 0});
  CHECK(sorted.x_concomitants == std::vector<double>{2, 1});
}

TEST_CASE("sort_with_concomitants identity on sorted input") {
  const auto sample = make_sample({1, 2, 3}, {1, 1, 0}, {5, 6, 7});
  const auto sorted = sort_with_concomitants(sample);
  CHECK(sorted.z_sorted == sample.z);
  CHECK(sorted.x_concomitants == sample.x);
}

TEST_CASE("sort_with_concomitants rejects tiny samples") {
  CHECK_THROWS_AS(sort_with_concomitants(make_sample({1}, {1}, {0})), size_error);
}

TEST_CASE("sorting is a permutation of the input multiset") {
  RngStream rng(41);
  CensoredSample sample;
  std::multiset<std::tuple<double, int, double>> in;
  for (int i = 0; i < 200; ++i) {
    // coarse grid forces ties
    const double z = 1.0 + std::floor(rng.next_u01() * 20.0);
    const int d = rng.next_u01() < 0.4 ? 0 : 1;
    const double x = std::floor(rng.next_u01() * 5.0);
    sample.push_back({z, d, {x}});
    in.emplace(z, d, x);
  }
  const auto sorted = sort_with_concomitants(sample);
  std::multiset<std::tuple<double, int, double>> out;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    out.emplace(sorted.z_sorted[i], static_cast<int>(sorted.delta_concomitants[i]), sorted.x_concomitants[i]);
  CHECK(in == out);
  CHECK(std::is_sorted(sorted.z_sorted.begin(), sorted.z_sorted.end()));
}

TEST_CASE("tail_subsample ratios") {
  const auto sorted = sort_with_concomitants(make_sample({1, 2, 4, 8}, {1, 1, 0, 1}, {0, 1, 2, 3}));
  const auto tail = tail_subsample(sorted, 3);
  CHECK(tail.threshold == 1.0);
  CHECK(tail.v == std::vector<double>{8, 4, 2});
  CHECK(tail.delta_star == std::vector<std::uint8_t>{1, 0, 1});
  CHECK(tail.x_star == std::vector<double>{3, 2, 1});
}

TEST_CASE("tail_subsample smallest case and degenerate ratios") {
  const auto two = sort_with_concomitants(make_sample({1, 2}, {1, 1}, {0, 0}));
  CHECK(tail_subsample(two, 1).v == std::vector<double>{2});

  const auto flat = sort_with_concomitants(make_sample({3, 3, 3}, {1, 1, 1}, {0, 0, 0}));
  CHECK(tail_subsample(flat, 2).v == std::vector<double>{1, 1});
}

TEST_CASE("tail_subsample bounds") {
  const auto sorted = sort_with_concomitants(make_sample({1, 2, 3}, {1, 1, 1}, {0, 0, 0}));
  CHECK_THROWS_AS(tail_subsample(sorted, 0), bounds_error);
  CHECK_THROWS_AS(tail_subsample(sorted, 3), bounds_error);
}

TEST_CASE("tail_subsample is scale invariant") {
  RngStream rng(7);
  std::vector<double> z;
  std::vector<int> d;
  std::vector<double> x;
  for (int i = 0; i < 64; ++i) {
    z.push_back(std::pow(rng.next_u01(), -0.8));
    d.push_back(rng.next_u01() < 0.3 ? 0 : 1);
    x.push_back(rng.next_u01());
  }
  const auto base = tail_subsample(sort_with_concomitants(make_sample(z, d, x)), 20);
  for (double c : {1e-6, 1e6}) {
    auto zs = z;
    for (auto& v : zs) v *= c;
    const auto scaled = tail_subsample(sort_with_concomitants(make_sample(zs, d, x)), 20);
    for (std::size_t i = 0; i < 20; ++i)
      CHECK(scaled.v[i] == doctest::Approx(base.v[i]).epsilon(1e-12));
    CHECK(scaled.delta_star == base.delta_star);
    CHECK(scaled.x_star == base.x_star);
  }
}

TEST_CASE("censored_proportion counting") {
  const auto sorted = sort_with_concomitants(make_sample({1, 2, 3, 4}, {1, 1, 0, 1}, {0, 0, 0, 0}));
  // top 3 by z: deltas (1, 0, 1)
  CHECK(censored_proportion(sorted, 3) == doctest::Approx(1.0 / 3.0));

  const auto all_events = sort_with_concomitants(make_sample({1, 2, 3}, {1, 1, 1}, {0, 0, 0}));
  CHECK(censored_proportion(all_events, 2) == 0.0);
  const auto all_censored = sort_with_concomitants(make_sample({1, 2, 3}, {0, 0, 0}, {0, 0, 0}));
  CHECK(censored_proportion(all_censored, 2) == 1.0);
  CHECK_THROWS_AS(censored_proportion(sorted, 4), bounds_error);
}

TEST_CASE("censored_proportion equals the mean of 1 - delta over the tail") {
  RngStream rng(12);
  std::vector<double> z;
  std::vector<int> d;
  std::vector<double> x;
  for (int i = 0; i < 50; ++i) {
    z.push_back(rng.next_u01() + 0.1);
    d.push_back(rng.next_u01() < 0.5 ? 0 : 1);
    x.push_back(0.0);
  }
  const auto sorted = sort_with_concomitants(make_sample(z, d, x));
  for (std::size_t k : {1, 7, 30, 49}) {
    const auto tail = tail_subsample(sorted, k);
    double mean = 0.0;
    for (auto ds : tail.delta_star) mean += 1.0 - static_cast<double>(ds);
    mean /= static_cast<double>(k);
    CHECK(censored_proportion(sorted, k) == mean);
  }
}
