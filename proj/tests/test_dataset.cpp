#include <gtest/gtest.h>

#include <numeric>
#include <set>
#include <sstream>

#include "cfx/dataset.hpp"
#include "cfx/errors.hpp"

using namespace cfx;

namespace {

const Json kConfig = Json::parse(R"({
  "label": "y", "classes": ["no", "yes"],
  "features": [
    {"name": "age", "kind": "numeric", "lo": 0, "hi": 10, "delta": 0.5},
    {"name": "city", "kind": "categorical", "categories": ["a", "b", "c"]},
    {"name": "owner", "kind": "binary"},
    {"name": "tier", "kind": "ordinal", "levels": 4}
  ]})");

DatasetBundle ingest(const std::string& csv, const Json& config = kConfig, std::uint64_t seed = 0) {
    std::istringstream in(csv);
    return ingest_csv(in, config, seed);
}

long failing_row(const std::string& csv) {
    try {
        ingest(csv);
    } catch (const ParseError& e) {
        return e.row();
    }
    return -1;
}

} // namespace

TEST(Dataset, ToyFileHasFourFeaturesAndSixAxes) {
    DatasetBundle b = ingest_csv(CFX_SOURCE_DIR "/data/toy/loans.csv",
                                 read_json_file(CFX_SOURCE_DIR "/data/toy/loans_config.json"), 0);
    EXPECT_EQ(b.schema->size(), 4u);
    EXPECT_EQ(b.schema->axis_count(), 6);
    EXPECT_EQ(b.data.size(), 200u);
    EXPECT_EQ(b.train.size(), 120u);
    EXPECT_EQ(b.class_names, (std::vector<std::string>{"deny", "approve"}));
}

TEST(Dataset, ValuesSnapToTheGrid) {
    DatasetBundle b = ingest("age,city,owner,tier,y\n3.3,b,1,2,yes\n10,a,0,0,no\n");
    EXPECT_EQ(b.data.points[0], (Point{{7, 1, 1, 2}}));
    EXPECT_EQ(b.data.points[1], (Point{{20, 0, 0, 0}}));
    EXPECT_EQ(b.data.labels, (std::vector<Label>{1, 0}));
}

TEST(Dataset, NumericRangeDefaultsToTheData) {
    Json cfg = Json::parse(R"({"label": "y", "features": [{"name": "x", "kind": "numeric", "steps": 4}]})");
    DatasetBundle b = ingest("x,y\n2,p\n6,q\n3,p\n", cfg);
    const auto& f = (*b.schema)[0];
    EXPECT_DOUBLE_EQ(f.lo, 2);
    EXPECT_DOUBLE_EQ(f.hi, 6);
    EXPECT_EQ(f.max_index(), 4);
    EXPECT_EQ(b.class_names, (std::vector<std::string>{"p", "q"}));
}

TEST(Dataset, SplitIsSixtyTwentyTwentyAndSeeded) {
    std::vector<std::size_t> tr, va, te, tr2, va2, te2;
    split_602020(1000, 3, tr, va, te);
    EXPECT_EQ(tr.size(), 600u);
    EXPECT_EQ(va.size(), 200u);
    EXPECT_EQ(te.size(), 200u);
    std::set<std::size_t> all(tr.begin(), tr.end());
    all.insert(va.begin(), va.end());
    all.insert(te.begin(), te.end());
    EXPECT_EQ(all.size(), 1000u);
    split_602020(1000, 3, tr2, va2, te2);
    EXPECT_EQ(tr, tr2);
    split_602020(1000, 4, tr2, va2, te2);
    EXPECT_NE(tr, tr2);
}

TEST(Dataset, DuplicateRowsAreKept) {
    DatasetBundle b = ingest("age,city,owner,tier,y\n1,a,0,0,no\n1,a,0,0,no\n1,a,0,0,yes\n");
    EXPECT_EQ(b.data.size(), 3u);
}

TEST(Dataset, MalformedRowsReportTheirRow) {
    const std::string head = "age,city,owner,tier,y\n1,a,0,0,no\n";
    EXPECT_EQ(failing_row(head + "1,z,0,0,no\n"), 2);
    EXPECT_EQ(failing_row(head + "1,a,0,0,no\nabc,a,0,0,no\n"), 3);
    EXPECT_EQ(failing_row(head + "1,a,0,0\n"), 2);
    EXPECT_EQ(failing_row(head + "1,a,0,0,\n"), 2);
    EXPECT_EQ(failing_row(head + "1,a,0,0,maybe\n"), 2);
    EXPECT_EQ(failing_row(head + "11,a,0,0,no\n"), 2);
    EXPECT_EQ(failing_row(head + "1,a,2,0,no\n"), 2);
    EXPECT_EQ(failing_row(head + "1,a,0,1.5,no\n"), 2);
    EXPECT_THROW(ingest("age,owner\n1,0\n"), ParseError);
}

TEST(Dataset, WriteThenReadRoundTrips) {
    DatasetBundle b = ingest("age,city,owner,tier,y\n3.5,b,1,2,yes\n0,c,0,3,no\n7,a,1,1,no\n");
    std::ostringstream out;
    write_csv(out, b, "y");
    DatasetBundle back = ingest(out.str());
    EXPECT_EQ(back.data.points, b.data.points);
    EXPECT_EQ(back.data.labels, b.data.labels);
}

TEST(Dataset, SubsetSelectsRows) {
    DatasetBundle b = ingest("age,city,owner,tier,y\n1,a,0,0,no\n2,b,1,1,yes\n3,c,0,2,no\n");
    LabeledData s = b.subset({2, 0});
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.points[0], b.data.points[2]);
    EXPECT_EQ(s.labels[1], 0);
}
