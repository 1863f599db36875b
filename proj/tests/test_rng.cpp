#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "segtopic/rng.hpp"

using namespace segtopic;

TEST_SUITE("rng") {

TEST_CASE("identical seeds give identical streams") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t x = a.next_u64();
    all_equal = all_equal && (x == b.next_u64());
    any_diff = any_diff || (x != c.next_u64());
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform() covers [0,1) with the right mean") {
  Rng rng(7);
  double sum = 0.0;
  double lo = 1.0, hi = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("uniform(lo,hi) stays inside the interval") {
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-3.0, 5.0);
    CHECK(v >= -3.0);
    CHECK(v < 5.0);
  }
}

TEST_CASE("uniform_int is unbiased across buckets") {
  Rng rng(11);
  std::vector<int> counts(10, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t v = rng.uniform_int(10);
    REQUIRE(v < 10);
    ++counts[v];
  }
  for (int c : counts) {
    CHECK(c > n / 10 - 500);  // ~5 sigma
    CHECK(c < n / 10 + 500);
  }
}

TEST_CASE("fork does not advance the parent and separates streams") {
  Rng a(100);
  Rng b(100);
  (void)a.fork(3);
  (void)a.fork(4);
  // Parent stream is untouched by forking.
  for (int i = 0; i < 8; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng base(100);
  Rng f1 = base.fork(1);
  Rng f2 = base.fork(2);
  Rng f1_again = base.fork(1);
  CHECK(f1.next_u64() == f1_again.next_u64());
  CHECK(f1.next_u64() != f2.next_u64());
}

TEST_CASE("normal() has standard moments") {
  Rng rng(13);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::fabs(mean) < 0.02);
  CHECK(std::fabs(var - 1.0) < 0.03);
}

TEST_CASE("shuffle yields a permutation, deterministically") {
  std::vector<int> v(1000);
  std::iota(v.begin(), v.end(), 0);
  Rng rng(17);
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 1000; ++i) CHECK(sorted[i] == i);

  std::vector<int> w(1000);
  std::iota(w.begin(), w.end(), 0);
  Rng rng2(17);
  rng2.shuffle(w);
  CHECK(v == w);

  // A 1000-element shuffle virtually never returns the identity.
  bool moved = false;
  for (int i = 0; i < 1000 && !moved; ++i) moved = v[i] != i;
  CHECK(moved);
}

}  // TEST_SUITE
