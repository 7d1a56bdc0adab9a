#include "doctest.h"

#include "authorship/common.hpp"

using namespace authorship;

TEST_CASE("rng draws are reproducible and in range") {
  Rng a(7), b(7);
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.below(13);
    CHECK(x == b.below(13));
    CHECK(x < 13);
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("derived seeds differ by tag") {
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
  CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 2.0 / 3.0, 1e-300, 123456.789, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("csv quoting") {
  const std::vector<std::string> fields{"plain", "with,comma", "with\"quote", ""};
  CHECK(csv::split_line(csv::join(fields)) == fields);
  CHECK(csv::join({"a", "b"}) == "a,b");
}

TEST_CASE("sha256 of empty input") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
