#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "motionkit/table.hpp"

using namespace motionkit;

TEST(FormatNumber, RoundTrips) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(i % 20) - 10);
    EXPECT_EQ(std::strtod(format_number(x).c_str(), nullptr), x);
  }
}

TEST(FormatNumber, ShortForms) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(-0.5), "-0.5");
}

TEST(Table, Csv) {
  Table t({"frame", "name", "value"});
  t.add_row({std::int64_t{0}, std::string("a"), 0.25});
  t.add_row({std::int64_t{1}, std::string("b"), 1.0});
  EXPECT_EQ(t.to_csv(), "frame,name,value\n0,a,0.25\n1,b,1\n");
  EXPECT_EQ(t.rows(), 2u);
}

TEST(Table, JsonArrayOfObjects) {
  Table t({"frame", "value"});
  t.add_row({std::int64_t{3}, 0.5});
  const auto doc = nlohmann::json::parse(t.to_json());
  ASSERT_TRUE(doc.is_array());
  EXPECT_EQ(doc[0]["frame"], 3);
  EXPECT_EQ(doc[0]["value"], 0.5);
  EXPECT_EQ(t.render(true), t.to_json());
  EXPECT_EQ(t.render(false), t.to_csv());
}

TEST(Table, RowWidthMustMatch) {
  Table t({"a", "b"});
  EXPECT_ANY_THROW(t.add_row({1.0}));
}
