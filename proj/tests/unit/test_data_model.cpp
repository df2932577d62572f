#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "weirflow/data_model.hpp"
#include "weirflow/errors.hpp"
#include "weirflow/hydraulics.hpp"

using namespace weirflow;

namespace {

const char* kHeader = "lambda,beta,L,W,Q,Y1,Y2,Y3,h1,Cd\n";

std::string row(double cd) {
  return "1,0,0.5,0.2,0.01,0.3,0.07,0.05,0.1," + std::to_string(cd) + "\n";
}

} // namespace

TEST_SUITE("data_model") {

TEST_CASE("csv with valid rows loads in file order") {
  std::string text = kHeader;
  for (int i = 0; i < 120; ++i) text += row(0.8 + 0.001 * i);
  const Dataset d = parse_csv(text);
  CHECK(d.size() == 120);
  CHECK(d.provenance() == Provenance::LoadedCsv);
  CHECK(d[0].cd.value() == doctest::Approx(0.8));
  CHECK(d[119].cd.value() == doctest::Approx(0.919));
  CHECK(d[0].h1 == 0.1);
}

TEST_CASE("header only is an empty dataset") {
  CHECK_THROWS_WITH_AS(parse_csv(kHeader), doctest::Contains("empty dataset"), ArgumentError);
}

TEST_CASE("negative discharge coefficient is rejected at its row") {
  const std::string text = std::string(kHeader) + row(0.9) + row(-0.5);
  try {
    parse_csv(text);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.row() == 3);
  }
}

TEST_CASE("schema errors name the column") {
  CHECK_THROWS_WITH_AS(parse_csv("lambda,beta,L,W,Q,Y1,Y2,Y3,Cd\n"), doctest::Contains("h1"),
                       SchemaError);
  CHECK_THROWS_WITH_AS(parse_csv("lambda,beta,L,W,Q,Y1,Y2,Y3,h1,Cd,extra\n"),
                       doctest::Contains("extra"), SchemaError);
}

TEST_CASE("non-numeric and blank cells are parse errors with the row") {
  const std::string bad = std::string(kHeader) + row(0.9) + "1,0,0.5,abc,0.01,0.3,0.07,0.05,0.1,0.9\n";
  try {
    parse_csv(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
  }
  const std::string blank = std::string(kHeader) + "1,0,0.5,,0.01,0.3,0.07,0.05,0.1,0.9\n";
  CHECK_THROWS_AS(parse_csv(blank), ParseError);
}

TEST_CASE("CRLF input is accepted") {
  const std::string text = "lambda,beta,L,W,Q,Y1,Y2,Y3,h1,Cd\r\n1,0,0.5,0.2,0.01,0.3,0.07,0.05,0.1,0.9\r\n";
  const Dataset d = parse_csv(text);
  REQUIRE(d.size() == 1);
  CHECK(d[0].cd.value() == 0.9);
}

TEST_CASE("sample invariants") {
  WeirSample s{1, 0, 0.5, 0.2, 0.01, 0.3, 0.07, 0.05, 0.1, 0.9};
  CHECK(s.violation().empty());
  s.L = 0;
  CHECK_FALSE(s.violation().empty());
  s.L = 0.5;
  s.beta = -1;
  CHECK_FALSE(s.violation().empty());
  s.beta = 0;
  s.cd = 3.0;
  CHECK_FALSE(s.violation().empty());
}

TEST_CASE("csv round trip preserves every sample exactly") {
  const Dataset d = generate_synthetic(50, SyntheticMode::Bagheri, 0.01, 3);
  const Dataset back = parse_csv(to_csv(d));
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(back[i] == d[i]);

  const auto path = std::filesystem::temp_directory_path() / "weirflow_roundtrip.csv";
  write_csv(d, path);
  const Dataset from_file = load_csv(path);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(from_file[i] == d[i]);
  std::filesystem::remove(path);
}

TEST_CASE("noise-free bagheri mode reproduces the formula exactly") {
  const Dataset d = generate_synthetic(120, SyntheticMode::Bagheri, 0.0, 7);
  CHECK(d.provenance() == Provenance::Synthetic);
  for (const WeirSample& s : d.samples()) {
    CHECK(s.cd.value() == hydraulics::cd_bagheri(s.lambda, s.h1, s.L, s.W));
    CHECK(s.violation().empty());
  }
}

TEST_CASE("synthetic generation is a pure function of its arguments") {
  const Dataset a = generate_synthetic(120, SyntheticMode::Bagheri, 0.01, 7);
  const Dataset b = generate_synthetic(120, SyntheticMode::Bagheri, 0.01, 7);
  CHECK(to_csv(a) == to_csv(b));
  const Dataset c = generate_synthetic(120, SyntheticMode::Bagheri, 0.01, 8);
  CHECK(to_csv(a) != to_csv(c));
}

TEST_CASE("synthetic noise has the expected mean absolute size") {
  const Dataset d = generate_synthetic(1000, SyntheticMode::Bagheri, 0.01, 7);
  double sum = 0.0;
  for (const WeirSample& s : d.samples()) {
    sum += std::fabs(s.cd.value() - hydraulics::cd_bagheri(s.lambda, s.h1, s.L, s.W));
  }
  const double mad = sum / 1000.0;
  CHECK(mad >= 0.0064);
  CHECK(mad <= 0.0096);
}

TEST_CASE("synthetic samples respect the documented ranges") {
  const Dataset d = generate_synthetic(500, SyntheticMode::Bagheri, 0.01, 11);
  for (const WeirSample& s : d.samples()) {
    CHECK(s.lambda >= 0.5);
    CHECK(s.lambda <= 2.0);
    CHECK((s.beta == 0.0 || (s.beta >= 10.0 && s.beta <= 60.0)));
    CHECK(s.L >= 0.1);
    CHECK(s.L <= 1.0);
    CHECK(s.W >= 0.05);
    CHECK(s.W <= 0.5);
    CHECK(s.h1 >= 0.01);
    CHECK(s.h1 <= 0.3 * s.W + 0.05);
    CHECK(s.Y1 > s.h1);
    CHECK(s.Y2 > 0.0);
    CHECK(s.Y3 > 0.0);
    // Q is consistent with the discharge relation at the sample's total head.
    const double v = s.Q / (kSyntheticChannelWidth * s.Y1);
    const double H1 = hydraulics::total_head(s.h1, v);
    CHECK(hydraulics::cd_from_discharge(s.Q, kSyntheticChannelWidth, H1) ==
          doctest::Approx(s.cd.value()).epsilon(1e-9));
  }
}

TEST_CASE("linear mode records its generator") {
  const Dataset d = generate_synthetic(100, SyntheticMode::Linear, 0.0, 5);
  REQUIRE(d.linear_generator().has_value());
  const LinearGenerator& g = *d.linear_generator();
  const Scaler z = standardize(d);
  for (const WeirSample& s : d.samples()) {
    const FeatureVector f = z.transform(s);
    double cd = g.intercept;
    for (std::size_t j = 0; j < kFeatureCount; ++j) cd += g.weights[j] * f[j];
    CHECK(s.cd.value() == doctest::Approx(cd).epsilon(1e-12));
  }
}

TEST_CASE("generator argument errors") {
  CHECK_THROWS_AS(generate_synthetic(1, SyntheticMode::Bagheri, 0.0, 1), ArgumentError);
  CHECK_THROWS_AS(generate_synthetic(10, SyntheticMode::Bagheri, -1.0, 1), ArgumentError);
  CHECK_THROWS_AS(parse_synthetic_mode("cubic"), ArgumentError);
}

TEST_CASE("standardize: population convention and degenerate columns") {
  std::vector<WeirSample> samples;
  for (double l : {1.0, 3.0}) samples.push_back({l, 0, 0.5, 0.2, 0.01, 0.3, 0.07, 0.05, 0.1, 0.9});
  const Dataset d(samples, Provenance::LoadedCsv);
  const Scaler z = standardize(d);
  CHECK(z.params().sd[0] == 1.0);
  CHECK(z.transform(d[0])[0] == -1.0);
  CHECK(z.transform(d[1])[0] == 1.0);
  // beta is constant: sd forced to 1, z-scores zero, warning recorded
  CHECK(z.params().sd[1] == 1.0);
  CHECK(z.transform(d[0])[1] == 0.0);
  CHECK_FALSE(z.params().warnings.empty());

  FeatureVector mean = z.params().mean;
  for (double v : z.transform(mean)) CHECK(v == 0.0);
}

TEST_CASE("standardize: training split has zero mean and unit sd") {
  const Dataset d = generate_synthetic(200, SyntheticMode::Bagheri, 0.01, 9);
  const RowMatrix X = standardize(d).transform(d);
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double m = X.col(j).mean();
    const double sd = std::sqrt((X.col(j).array() - m).square().mean());
    CHECK(std::fabs(m) < 1e-12);
    if (sd > 0) CHECK(std::fabs(sd - 1.0) < 1e-12);
  }
}

TEST_CASE("empty dataset construction fails") {
  CHECK_THROWS_AS(Dataset({}, Provenance::Synthetic), ArgumentError);
}

} // TEST_SUITE
