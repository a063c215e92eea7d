#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "moe/channel_io.hpp"
#include "oracles.hpp"

using namespace moe;

namespace {

const char* kIdentity = R"({"d_in": 2, "d_out": 2, "kraus": [[[1, 0], [0, 1]]]})";

InputError catch_input(const std::string& text) {
  try {
    parse_channel(text, "t.json");
  } catch (const InputError& e) {
    return e;
  }
  ADD_FAILURE() << "no error for " << text;
  return InputError("none");
}

}  // namespace

TEST(ChannelIo, ParsesRealAndComplexEntries) {
  const ChannelSpec ch = parse_channel(kIdentity);
  EXPECT_EQ(ch.d_in, 2);
  EXPECT_EQ(ch.d_out, 2);
  ASSERT_EQ(ch.kraus.size(), 1u);
  EXPECT_LE((ch.kraus[0] - ComplexMatrix::Identity(2, 2)).norm(), 1e-15);

  const ChannelSpec z = parse_channel(R"({"d_in": 1, "d_out": 2, "kraus": [[[[0, 1]], [0]]]})");
  EXPECT_EQ(z.kraus[0](0, 0), Complex(0.0, 1.0));
}

TEST(ChannelIo, RoundTripThroughJson) {
  Rng rng = make_stream(1, 0);
  for (int t = 0; t < 5; ++t) {
    const ChannelSpec ch = oracle::random_channel(2 + t % 2, 3, 2, rng);
    const ChannelSpec back = parse_channel(channel_to_json(ch).dump());
    ASSERT_EQ(back.kraus.size(), ch.kraus.size());
    for (std::size_t k = 0; k < ch.kraus.size(); ++k) EXPECT_EQ(back.kraus[k], ch.kraus[k]);
    const ComplexVector psi = random_unit_vector(ch.d_in, rng);
    EXPECT_LE((apply_channel(back, pure_state(psi)) - apply_channel(ch, pure_state(psi))).norm(), 1e-15);
  }
}

TEST(ChannelIo, MalformedJsonReportsPosition) {
  const InputError e = catch_input("{\"d_in\": 2,\n  \"d_out\": ]");
  EXPECT_EQ(e.line, 2u);
  EXPECT_GT(e.column, 0u);
  EXPECT_NE(std::string(e.what()).find("t.json:2:"), std::string::npos);
}

TEST(ChannelIo, SchemaErrorsNameTheField) {
  EXPECT_NE(std::string(catch_input(R"({"d_out": 2, "kraus": []})").what()).find("d_in"), std::string::npos);
  EXPECT_NE(std::string(catch_input(R"({"d_in": 0, "d_out": 2, "kraus": []})").what()).find("positive"),
            std::string::npos);
  EXPECT_NE(std::string(catch_input(R"({"d_in": 2, "d_out": 2, "kraus": []})").what()).find("kraus"),
            std::string::npos);
  const std::string rows = catch_input(R"({"d_in": 2, "d_out": 2, "kraus": [[[1, 0]]]})").what();
  EXPECT_NE(rows.find("kraus[0]"), std::string::npos);
  const std::string entry = catch_input(R"({"d_in": 2, "d_out": 2, "kraus": [[[1, "x"], [0, 1]]]})").what();
  EXPECT_NE(entry.find("kraus[0][0][1]"), std::string::npos);
  EXPECT_EQ(catch_input("[1, 2]").line, 1u);
}

TEST(ChannelIo, NonTracePreservingCarriesResidual) {
  const InputError e = catch_input(R"({"d_in": 2, "d_out": 2, "kraus": [[[0.9, 0], [0, 1]]]})");
  EXPECT_NEAR(e.residual, 0.19, 1e-12);
}

TEST(ChannelIo, LoadsFromFile) {
  const std::string path = ::testing::TempDir() + "moe_identity.json";
  {
    std::ofstream out(path);
    out << kIdentity;
  }
  EXPECT_EQ(load_channel(path).d_in, 2);
  std::remove(path.c_str());
  EXPECT_THROW(load_channel(path), InputError);
}

TEST(StateIo, InlineAndFile) {
  const ComplexVector psi = load_state("[[0.6, 0], [0, 0.8]]", 2);
  EXPECT_EQ(psi(0), Complex(0.6, 0.0));
  EXPECT_EQ(psi(1), Complex(0.0, 0.8));
  const std::string path = ::testing::TempDir() + "moe_state.json";
  {
    std::ofstream out(path);
    out << "[1, 0, 0]";
  }
  EXPECT_EQ(load_state(path, 3)(0), Complex(1.0, 0.0));
  std::remove(path.c_str());
}

TEST(StateIo, Errors) {
  EXPECT_THROW(parse_state("[1, 0]", 3), InputError);
  try {
    parse_state("[1, 1]", 2);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NEAR(e.residual, std::sqrt(2.0) - 1.0, 1e-12);
  }
  EXPECT_THROW(parse_state("[1, [0, 0, 0]]", 2), InputError);
}

TEST(ChannelIo, ComplexToJson) {
  EXPECT_EQ(complex_to_json(Complex(1.5, -2.0)).dump(), "[1.5,-2.0]");
}
