#include <gtest/gtest.h>

#include <sstream>

#include "confeval/dataset_io.hpp"
#include "fixtures.hpp"

using namespace confeval;

namespace {

const char* kHeader =
    "id,age,gender,ethnicity,first_language,local_authority,recruitment_source,covid_status,cough_any,fatigue,"
    "headache,smell_taste_change,runny_blocked_nose,fever,loss_of_taste,shortness_of_breath,sore_throat,"
    "new_continuous_cough,diarrhoea,abdominal_pain,other_symptom,no_symptoms,prefer_not_to_say,asthma,copd,"
    "other_resp,none_resp,smoker_status,height_bin,weight_bin,viral_load,test_date,submission_date,test_type,"
    "lab_under_investigation,metadata_complete,f0,f1\n";

std::string row(const std::string& id, const std::string& status, const std::string& audio = "0.5,-1.25",
                const std::string& smoker = "Never") {
    return id + ",30,Female,White British,English,Leeds,TestAndTrace," + status +
           ",true,false,false,false,false,false,false,false,false,false,false,false,false,false,false,"
           "false,false,false,true," +
           smoker + ",160-169,70-79,Unrecorded,2021-03-14,2021-03-16,PCR,false,true," + audio + "\n";
}

Dataset parse(const std::string& text) {
    std::istringstream in(text);
    return parse_dataset(in);
}

std::string preamble() { return std::string("schema=1,feature_dim=2,provenance=fixture\n") + kHeader; }

}  // namespace

TEST(ParseDataset, ThreeRowFixture) {
    const auto d = parse(preamble() + row("A", "Positive") + row("B", "Negative") + row("C", "Negative"));
    ASSERT_EQ(d.size(), 3u);
    EXPECT_EQ(d.feature_dim(), 2u);
    EXPECT_EQ(d.provenance(), "fixture");
    const auto& a = d[0];
    EXPECT_EQ(a.id, "A");
    EXPECT_EQ(a.age, 30);
    EXPECT_TRUE(a.positive());
    EXPECT_TRUE(a.has(Symptom::CoughAny));
    EXPECT_TRUE(a.has(RespCondition::NoneResp));
    EXPECT_EQ(*a.height_cm(), 165.0);
    EXPECT_EQ(*a.weight_kg(), 75.0);
    EXPECT_EQ(format_date(a.test_date), "2021-03-14");
    ASSERT_TRUE(a.audio_features);
    EXPECT_EQ((*a.audio_features)[1], -1.25);
}

TEST(ParseDataset, InvalidEnumNamesRowAndColumn) {
    try {
        parse(preamble() + row("A", "Positive") + row("B", "maybe"));
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 4u);
        EXPECT_EQ(e.column(), "covid_status");
    }
}

TEST(ParseDataset, EmptyAudioMeansAbsent) {
    const auto d = parse(preamble() + row("A", "Positive", ","));
    ASSERT_EQ(d.size(), 1u);
    EXPECT_FALSE(d[0].audio_features.has_value());
    EXPECT_TRUE(d[0].metadata_complete);
}

TEST(ParseDataset, PartiallyEmptyAudioRejected) {
    EXPECT_THROW(parse(preamble() + row("A", "Positive", "1.0,")), ParseError);
}

TEST(ParseDataset, EmptyMetadataCellMarksIncomplete) {
    const auto d = parse(preamble() + row("A", "Positive", "0,0", ""));
    EXPECT_FALSE(d[0].smoker_status.has_value());
    EXPECT_FALSE(d[0].metadata_complete);
}

TEST(ParseDataset, DuplicateIdRejected) {
    EXPECT_THROW(parse(preamble() + row("A", "Positive") + row("A", "Negative")), DataError);
}

TEST(ParseDataset, WrongFeatureCountRejected) {
    EXPECT_THROW(parse(preamble() + row("A", "Positive", "1,2,3")), ParseError);
}

TEST(ParseDataset, MissingColumnRejected) {
    std::string header = kHeader;
    header.replace(header.find("fatigue,"), 8, "");
    EXPECT_THROW(parse("schema=1,feature_dim=2,provenance=x\n" + header), ParseError);
}

TEST(ParseDataset, UnsupportedSchemaRejected) {
    EXPECT_THROW(parse(std::string("schema=2,feature_dim=2,provenance=x\n") + kHeader), ParseError);
}

TEST(ParseDataset, LowercaseBooleanOnly) {
    std::string r = row("A", "Positive");
    r.replace(r.find("true"), 4, "TRUE");
    EXPECT_THROW(parse(preamble() + r), ParseError);
}

TEST(WriteDataset, RoundTripIsExact) {
    auto recs = fixtures::random_records(40, 9);
    recs[3].ethnicity = "Mixed, \"other\"";
    recs[5].audio_features.reset();
    recs[7].smoker_status.reset();
    recs[7].metadata_complete = false;
    const auto d = fixtures::dataset(recs);
    std::ostringstream a;
    write_dataset(a, d);
    const auto back = parse(a.str());
    std::ostringstream b;
    write_dataset(b, back);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(back[3].ethnicity, "Mixed, \"other\"");
    EXPECT_FALSE(back[5].audio_features.has_value());
    EXPECT_EQ((*back[0].audio_features)[0], (*d[0].audio_features)[0]);
}

TEST(Csv, QuotedFields) {
    const auto f = split_csv_line("a,\"b,c\",\"d\"\"e\",");
    ASSERT_EQ(f.size(), 4u);
    EXPECT_EQ(f[1], "b,c");
    EXPECT_EQ(f[2], "d\"e");
    EXPECT_EQ(f[3], "");
    EXPECT_EQ(csv_escape("x,y"), "\"x,y\"");
}

TEST(Csv, ShortestDoubleRoundTrips) {
    for (double v : {0.1, -1.0 / 3.0, 1e-300, 123456789.125}) EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(Dataset, RejectsInconsistentFeatureDimension) {
    auto r = fixtures::eligible("A");
    r.audio_features = std::vector<double>{1.0};
    EXPECT_THROW(fixtures::dataset({r}), DataError);
}
