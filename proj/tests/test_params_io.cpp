#include <doctest.h>

#include <random>
#include <sstream>

#include "stefan/errors.hpp"
#include "stefan/params_io.hpp"
#include "stefan/text_format.hpp"

using namespace stefan;

namespace {

MarketParams sample_params() {
  MarketParams p;
  p.n = 3;
  p.ball_count = 2;
  p.alpha = 13338.831033802628;
  p.alpha_in = 798.43852863726136;
  p.centers = {{3.4169066753673354, 2.7146947438208788, 3.0228609409422438}, {0.1, -0.2, 1.0 / 3.0}};
  p.radii0 = {0.016557804392248965, 0.1};
  p.v_inf0 = 2.0 / (p.radii0[0] + p.radii0[1]);
  p.c0 = 1.0;
  p.cs = 681.37418586369336;
  return p;
}

}  // namespace

TEST_CASE("params round-trip bit for bit") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(1e-6, 1e6);
  for (int trial = 0; trial < 200; ++trial) {
    auto p = sample_params();
    p.alpha = u(rng);
    p.radii0 = {u(rng), u(rng)};
    p.centers[1] = {u(rng), -u(rng), u(rng)};
    p.v_inf0 = u(rng);
    std::stringstream buf;
    write_params(buf, p);
    const auto q = read_params(buf);
    CHECK(q.alpha == p.alpha);
    CHECK(q.radii0 == p.radii0);
    CHECK(q.centers == p.centers);
    CHECK(q.v_inf0 == p.v_inf0);
    CHECK(q.cs == p.cs);
  }
}

TEST_CASE("params keys") {
  std::stringstream buf;
  write_params(buf, sample_params());
  const auto text = buf.str();
  for (const char* key : {"n=3", "I=2", "alpha=", "alpha_in=", "v_inf0=", "c0=", "cs=", "center.1=", "center.2=",
                          "radius0.1=", "radius0.2="}) {
    CHECK(text.find(key) != std::string::npos);
  }
  CHECK(is_params_key("center.12"));
  CHECK_FALSE(is_params_key("center."));
  CHECK_FALSE(is_params_key("sigma.kind"));
}

TEST_CASE("default far field when v_inf0 is omitted") {
  std::istringstream in("n=1\nI=2\nalpha=5\nc0=1\ncs=10\ncenter.1=0\ncenter.2=1\nradius0.1=1\nradius0.2=3\n");
  CHECK(read_params(in).v_inf0 == doctest::Approx(0.5));
}

TEST_CASE("malformed params") {
  const auto fails = [](const std::string& text) {
    std::istringstream in(text);
    CHECK_THROWS_AS(read_params(in), InputError);
  };
  fails("n=1\nI=1\nalpha=5\nc0=1\ncs=10\ncenter.1=0\n");                              // missing radius
  fails("n=1\nI=1\nalpha=5\nc0=1\ncs=10\ncenter.1=0\nradius0.1=1\nradius0.2=1\n");  // index beyond I
  fails("n=1\nI=1\nalpha=5\nc0=1\ncs=10\ncenter.1=0\nradius0.1=0\n");               // zero radius
  fails("n=2\nI=1\nalpha=5\nc0=1\ncs=10\ncenter.1=0\nradius0.1=1\n");               // dimension
  fails("n=1\nn=1\n");
  fails("just text\n");
  fails("n=1\nI=1\nalpha=abc\nc0=1\ncs=10\ncenter.1=0\nradius0.1=1\n");
}

TEST_CASE("strict number parsing") {
  CHECK(parse_double(" 1.5 ", "x") == 1.5);
  CHECK_THROWS_AS(parse_double("1.5x", "x"), InputError);
  CHECK_THROWS_AS(parse_double("", "x"), InputError);
  CHECK(parse_integer("42", "k") == 42);
  CHECK_THROWS_AS(parse_integer("4.2", "k"), InputError);
  CHECK(format_double(0.1) == "0.10000000000000001");
}
