#include <filesystem>

#include <gtest/gtest.h>

#include "gengrad/fixtures.hpp"
#include "gengrad/io.hpp"
#include "gengrad/random.hpp"

using namespace gengrad;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "gengrad_io_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Json, VectorRoundTripIsExact) {
  Rng rng(3);
  const VectorXd v = rng.uniform_vector(50, -1e3, 1e3);
  EXPECT_EQ(vector_from_json(Json::parse(to_json(v).dump())), v);
  EXPECT_THROW(vector_from_json(Json::parse(R"([1, "a"])")), IoError);
}

TEST(Json, NetworkAndMeasureRoundTrip) {
  const auto f = make_fixture("leaky-2-3-2");
  const auto [arch, theta] = network_from_json(Json::parse(network_to_json(f.arch, f.theta).dump()));
  EXPECT_EQ(arch.widths(), f.arch.widths());
  EXPECT_EQ(theta, f.theta);
  const auto m = measure_from_json(Json::parse(measure_to_json(f.measure).dump()));
  ASSERT_EQ(m.size(), f.measure.size());
  for (std::size_t s = 0; s < m.size(); ++s) {
    EXPECT_EQ(m.samples()[s].x, f.measure.samples()[s].x);
    EXPECT_EQ(m.samples()[s].y, f.measure.samples()[s].y);
    EXPECT_EQ(m.samples()[s].w, f.measure.samples()[s].w);
  }
  EXPECT_THROW(network_from_json(Json::parse(R"({"widths": [2, 1], "theta": [1, 2]})")), IoError);
}

TEST(Json, ActivationRoundTrip) {
  for (const auto& act : {relu(), leaky_relu(0.2), abs_activation(1.0), hard_tanh(), softplus(),
                          custom_pwl({{-0.5, 0.0}, {0.0, 0.25}, {1.0, 0.5}}, 0.1, 2.0),
                          relu().with_kink_values({0.4})}) {
    const auto back = activation_from_json(Json::parse(activation_to_json(act).dump()));
    EXPECT_EQ(back.kind(), act.kind());
    EXPECT_EQ(back.kink_values(), act.kink_values());
    EXPECT_EQ(back.approach_side(), act.approach_side());
    for (double x : {-2.0, -0.3, 0.0, 0.7, 3.0}) EXPECT_EQ(back.value(x), act.value(x)) << act.kind();
  }
}

TEST(Json, ActivationErrors) {
  EXPECT_THROW(activation_from_json(Json::parse(R"({"kind": "gelu"})")), IoError);
  EXPECT_THROW(activation_from_json(Json::parse(R"({"kind": "relu", "kink_values": {"0.5": 1}})")), IoError);
  EXPECT_THROW(activation_from_json(Json::parse(R"({"kind": "relu", "approach_side": "up"})")), IoError);
  const auto a = activation_from_json(Json::parse(R"({"kind": "relu", "kink_values": {"0": 0.25}})"));
  EXPECT_EQ(a.kink_values(), std::vector<double>{0.25});
}

TEST(Csv, MeasureRoundTrip) {
  const auto f = make_fixture("relu-2-3-2");
  const auto m = measure_from_csv(measure_to_csv(f.measure));
  ASSERT_EQ(m.size(), f.measure.size());
  for (std::size_t s = 0; s < m.size(); ++s) {
    EXPECT_EQ(m.samples()[s].x, f.measure.samples()[s].x);
    EXPECT_EQ(m.samples()[s].w, f.measure.samples()[s].w);
  }
  const auto unweighted = measure_from_csv("x_0,y_0\n1,2\n3,4\n");
  EXPECT_EQ(unweighted.total_mass(), 2.0);
  EXPECT_THROW(measure_from_csv("x_0,y_0\n1\n"), IoError);
  EXPECT_THROW(measure_from_csv("a,b\n1,2\n"), IoError);
  EXPECT_THROW(measure_from_csv("x_0,y_0\n1,abc\n"), IoError);
}

TEST(Files, BinaryAndDispatch) {
  Rng rng(4);
  const VectorXd v = rng.uniform_vector(17, -1, 1);
  const auto bin = scratch("theta.bin");
  write_binary(bin, v);
  EXPECT_EQ(fs::file_size(bin), 17u * 8u);
  EXPECT_EQ(read_binary(bin), v);
  const auto f = make_fixture("affine-1-1");
  const auto csv = scratch("data.csv");
  write_text(csv, measure_to_csv(f.measure));
  EXPECT_EQ(load_measure(csv).size(), f.measure.size());
  const auto json = scratch("data.json");
  write_text(json, measure_to_json(f.measure).dump());
  EXPECT_EQ(load_measure(json).total_mass(), f.measure.total_mass());
  EXPECT_THROW(load_measure(scratch("data.txt")), IoError);
  EXPECT_THROW(read_text(scratch("missing.json")), IoError);
  write_text(scratch("odd.bin"), "abc");
  EXPECT_THROW(read_binary(scratch("odd.bin")), IoError);
}

TEST(Format, ShortestExactDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}
