#include <sstream>

#include <gtest/gtest.h>

#include "reann/error.hpp"
#include "reann/keyvalue.hpp"

using namespace reann;

TEST(KeyValue, ParsesKeysCommentsAndOrder) {
  std::istringstream in(
      "# header\n"
      "train.learning_rate = 0.5\n"
      "\n"
      "split.train = 0, 350   # trailing comment\n"
      "name = breast-cancer\n");
  const auto kv = KeyValueFile::parse(in);
  EXPECT_DOUBLE_EQ(kv.number("train.learning_rate"), 0.5);
  EXPECT_EQ(kv.at("split.train"), "0, 350");
  EXPECT_EQ(kv.at("name"), "breast-cancer");
  const std::vector<std::string> order{"train.learning_rate", "split.train", "name"};
  EXPECT_EQ(kv.keys(), order);
}

TEST(KeyValue, LaterValueReplacesEarlierButKeepsPosition) {
  KeyValueFile kv;
  kv.set("a", "1");
  kv.set("b", "2");
  kv.set("a", "3");
  std::ostringstream out;
  kv.write(out);
  EXPECT_EQ(out.str(), "a = 3\nb = 2\n");
}

TEST(KeyValue, TypedAccessors) {
  std::istringstream in("n = 12\nflag = true\nlist = 1, 0.5, 0.25\n");
  const auto kv = KeyValueFile::parse(in);
  EXPECT_EQ(kv.integer("n"), 12);
  EXPECT_TRUE(kv.boolean_or("flag", false));
  EXPECT_FALSE(kv.boolean_or("absent", false));
  EXPECT_EQ(kv.integer_or("absent", 7), 7);
  EXPECT_EQ(kv.numbers("list"), (std::vector<double>{1.0, 0.5, 0.25}));
  EXPECT_FALSE(kv.get("absent").has_value());
}

TEST(KeyValue, MalformedInputs) {
  std::istringstream no_eq("just words\n");
  EXPECT_THROW(KeyValueFile::parse(no_eq), MalformedInput);
  std::istringstream empty_key(" = 3\n");
  EXPECT_THROW(KeyValueFile::parse(empty_key), MalformedInput);
  std::istringstream bad_number("x = 1.5abc\n");
  const auto kv = KeyValueFile::parse(bad_number);
  EXPECT_THROW(kv.number("x"), MalformedInput);
  EXPECT_THROW(kv.integer("x"), MalformedInput);
  EXPECT_THROW(kv.at("missing"), MalformedInput);
}

TEST(KeyValue, ExactDecimalRoundTrips) {
  for (const double v : {0.1, 1.0 / 3.0, -2.5e-9, 0.96275071633237819, 350.0}) {
    const std::string s = exact_decimal(v);
    EXPECT_EQ(parse_double(s, "test"), v) << s;
  }
  EXPECT_EQ(exact_decimal(0.5), "0.5");
}

TEST(KeyValue, SplitAndTrim) {
  EXPECT_EQ(trim("  a b \t"), "a b");
  EXPECT_EQ(split_list("a | b|c ", '|'), (std::vector<std::string>{"a", "b", "c"}));
}
