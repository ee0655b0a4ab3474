#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "semaxis/config_io.hpp"
#include "semaxis/digest.hpp"
#include "semaxis/error.hpp"
#include "semaxis/geometry.hpp"
#include "semaxis/random.hpp"
#include "semaxis/report.hpp"
#include "semaxis/saxd.hpp"
#include "semaxis/survey.hpp"
#include "semaxis/synthetic.hpp"

using namespace semaxis;
using namespace semaxis::io;

namespace {

SaxdDump random_dump(Rng& rng, std::size_t dim, std::size_t count) {
    SaxdDump d;
    d.header.model_id = "model-" + std::to_string(rng.below(1000));
    d.header.layer = rng.below(40);
    d.header.dim = dim;
    d.header.pooling = rng.below(2) ? "mean" : "last";
    for (std::size_t i = 0; i < count; ++i) {
        SaxdRecord r;
        r.name = "word" + std::to_string(i);
        r.values.resize(dim);
        for (float& v : r.values) v = static_cast<float>(rng.normal());
        d.records.push_back(std::move(r));
    }
    return d;
}

ErrorKind decode_kind(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_saxd(bytes);
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "decode succeeded";
    return ErrorKind::aggregate;
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

// hand-assembled file, independent of the encoder
std::vector<std::uint8_t> assemble(const std::string& header,
                                   const std::vector<std::pair<std::string, std::size_t>>& recs) {
    std::vector<std::uint8_t> b{'S', 'A', 'X', 'D'};
    put_u32(b, 1);
    put_u32(b, static_cast<std::uint32_t>(header.size()));
    b.insert(b.end(), header.begin(), header.end());
    for (const auto& [name, n] : recs) {
        b.push_back(static_cast<std::uint8_t>(name.size()));
        b.push_back(0);
        b.insert(b.end(), name.begin(), name.end());
        for (std::size_t i = 0; i < n; ++i) {
            const float f = static_cast<float>(i) * 0.5f;
            std::uint32_t bits;
            std::memcpy(&bits, &f, 4);
            put_u32(b, bits);
        }
    }
    return b;
}

std::filesystem::path scratch(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("semaxis_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

// --- SAXD ------------------------------------------------------------------

TEST(Saxd, RoundTripIsByteIdentical) {
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
        const auto d = random_dump(rng, 1 + rng.below(100), rng.below(20));
        const auto bytes = encode_saxd(d);
        const auto back = decode_saxd(bytes);
        EXPECT_EQ(back.records, d.records);
        EXPECT_EQ(back.header.model_id, d.header.model_id);
        EXPECT_EQ(back.header.layer, d.header.layer);
        EXPECT_EQ(encode_saxd(back), bytes);
    }
}

TEST(Saxd, LittleEndianLayout) {
    SaxdDump d;
    d.header = {"m", 2, 1, "mean", nlohmann::json::object()};
    d.records.push_back({"ab", {1.0f}});
    const auto b = encode_saxd(d);
    ASSERT_GE(b.size(), 12u);
    EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "SAXD");
    EXPECT_EQ(b[4], 1);
    EXPECT_EQ(b[5] | b[6] | b[7], 0);
    const std::size_t hlen = b[8] | (b[9] << 8) | (b[10] << 16) | (b[11] << 24);
    const auto tail = std::vector<std::uint8_t>(b.begin() + 12 + hlen, b.end());
    EXPECT_EQ(tail, (std::vector<std::uint8_t>{2, 0, 'a', 'b', 0x00, 0x00, 0x80, 0x3f}));
}

TEST(Saxd, HandAssembledFileDecodes) {
    const auto b = assemble(
        R"({"model_id":"x","layer":3,"dim":4,"pooling":"last","count":2,"origin":"hf"})",
        {{"piano", 4}, {"fire", 4}});
    const auto d = decode_saxd(b);
    EXPECT_EQ(d.header.layer, 3u);
    EXPECT_EQ(d.header.extra.at("origin"), "hf");
    EXPECT_EQ(d.records[1].name, "fire");
    EXPECT_EQ(d.records[1].values, (std::vector<float>{0.0f, 0.5f, 1.0f, 1.5f}));
    EXPECT_EQ(encode_saxd(d).size(), b.size());
}

TEST(Saxd, Errors) {
    Rng rng(2);
    const auto good = encode_saxd(random_dump(rng, 8, 3));

    auto magic = good;
    magic[0] = 'X';
    EXPECT_EQ(decode_kind(magic), ErrorKind::bad_magic);

    auto version = good;
    version[4] = 2;
    EXPECT_EQ(decode_kind(version), ErrorKind::version_mismatch);

    for (std::size_t cut : {std::size_t{2}, std::size_t{10}, good.size() - 1, good.size() - 17})
        EXPECT_EQ(decode_kind(std::vector(good.begin(), good.begin() + cut)), ErrorKind::truncated)
            << cut;

    auto trailing = good;
    trailing.push_back(0);
    EXPECT_NE(decode_kind(trailing), ErrorKind::aggregate);

    const auto dup = assemble(R"({"model_id":"x","layer":0,"dim":2,"pooling":"mean","count":2})",
                              {{"a", 2}, {"a", 2}});
    EXPECT_EQ(decode_kind(dup), ErrorKind::duplicate_name);

    const auto bad_json = assemble("{not json", {});
    EXPECT_EQ(decode_kind(bad_json), ErrorKind::parse);
}

TEST(Saxd, ShortRecordIsNamed) {
    const auto b = assemble(
        R"({"model_id":"x","layer":8,"dim":3072,"pooling":"mean","count":3})",
        {{"piano", 3072}, {"violin", 3071}, {"cello", 3072}});
    try {
        decode_saxd(b);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::dim_inconsistency);
        EXPECT_NE(std::string(e.what()).find("violin"), std::string::npos) << e.what();
    }
}

TEST(Saxd, EncoderRejectsBadDumps) {
    SaxdDump d;
    d.header = {"m", 0, 2, "mean", nlohmann::json::object()};
    d.records.push_back({"a", {1.0f}});
    EXPECT_THROW(encode_saxd(d), Error);
    d.records = {{"a", {1.0f, 2.0f}}, {"a", {1.0f, 2.0f}}};
    EXPECT_THROW(encode_saxd(d), Error);
}

TEST(Saxd, FileRoundTrip) {
    Rng rng(3);
    const auto dir = scratch("saxd");
    const auto d = random_dump(rng, 64, 5);
    write_saxd(dir / "f.saxd", d);
    EXPECT_EQ(read_saxd(dir / "f.saxd").records, d.records);
    EXPECT_FALSE(std::filesystem::exists(dir / "f.saxd.tmp"));
    EXPECT_THROW(read_saxd(dir / "missing.saxd"), Error);
    std::filesystem::remove_all(dir);
}

TEST(Saxw, RoundTripAndShapeCheck) {
    WeightFile w;
    w.model_id = "toy";
    w.tensors.push_back({"a", {2, 3}, {1, 2, 3, 4, 5, 6}});
    w.tensors.push_back({"b", {4}, {0.5f, -0.5f, 0, 1}});
    const auto bytes = encode_weights(w);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "SAXW");
    const auto back = decode_weights(bytes);
    ASSERT_EQ(back.tensors.size(), 2u);
    EXPECT_EQ(back.tensors[0].shape, (std::vector<std::size_t>{2, 3}));
    EXPECT_EQ(back.tensors[1].values, w.tensors[1].values);
    EXPECT_EQ(encode_weights(back), bytes);
    w.tensors[0].values.pop_back();
    EXPECT_THROW(encode_weights(w), Error);
}

TEST(Digest, KnownVector) {
    EXPECT_EQ(sha256_hex(std::string_view("abc")),
              "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

// --- survey ----------------------------------------------------------------

TEST(Survey, HandWrittenTable) {
    const auto in = parse_survey_csv("word,good-bad,hot-cold\npiano,4.5,3\nfire,2,-6.25\nriver,0,1e-3\n");
    EXPECT_TRUE(in.rejected.empty());
    const auto& t = in.table;
    EXPECT_EQ(t.words, (std::vector<std::string>{"piano", "fire", "river"}));
    EXPECT_EQ(t.scales, (std::vector<std::string>{"good-bad", "hot-cold"}));
    EXPECT_TRUE(t.ratings == DenseMatrix::from_rows({{4.5, 3}, {2, -6.25}, {0, 1e-3}}));
}

TEST(Survey, QuotingBomAndBlankLines) {
    const auto in = parse_survey_csv("\xEF\xBB\xBFword,\"good-bad\"\r\n\r\n\"ice, cream\",1\r\n");
    ASSERT_EQ(in.table.words.size(), 1u);
    EXPECT_EQ(in.table.words[0], "ice, cream");
}

TEST(Survey, BadRowsAreRejectedWithLines) {
    const auto in = parse_survey_csv(
        "word,a-b,c-d\nx,1,2\nx,3,4\ny,1\nz,1,abc\nw,,2\n,1,2\nv,5,6\n");
    EXPECT_EQ(in.table.words, (std::vector<std::string>{"x", "v"}));
    ASSERT_EQ(in.rejected.size(), 5u);
    EXPECT_EQ(in.rejected[0].line, 3u);
    EXPECT_EQ(in.rejected[0].word, "x");
    EXPECT_EQ(in.rejected[1].line, 4u);
    EXPECT_EQ(in.rejected[2].line, 5u);
    EXPECT_EQ(in.rejected[3].line, 6u);
    EXPECT_EQ(in.rejected[4].line, 7u);
    // total: every data row is accepted or rejected
    EXPECT_EQ(in.table.words.size() + in.rejected.size(), 7u);
    try {
        require_complete(in);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::aggregate);
    }
}

TEST(Survey, DuplicateWordIsAnError) {
    const auto in = parse_survey_csv("word,a-b\npiano,1\npiano,2\n");
    EXPECT_EQ(in.rejected.size(), 1u);
    EXPECT_THROW(require_complete(in), Error);
}

TEST(Survey, HeaderErrors) {
    EXPECT_THROW(parse_survey_csv("name,a-b\nx,1\n"), Error);
    EXPECT_THROW(parse_survey_csv("word,ab\nx,1\n"), Error);
    EXPECT_THROW(parse_survey_csv("word,a-b,a-b\nx,1,2\n"), Error);
    EXPECT_THROW(parse_survey_csv(""), Error);
}

TEST(Survey, SyntheticRoundTrip) {
    SyntheticWorldSpec spec;
    spec.seed = 4;
    spec.n_words = 50;
    spec.n_axes = 6;
    const auto w = generate_synthetic_world(spec);
    const auto dir = scratch("survey");
    write_survey_csv(dir / "s.csv", w.survey);
    const auto back = require_complete(read_survey_csv(dir / "s.csv"));
    EXPECT_EQ(back.words, w.survey.words);
    EXPECT_EQ(back.scales, w.survey.scales);
    EXPECT_TRUE(back.ratings == w.survey.ratings);
    std::filesystem::remove_all(dir);
}

TEST(Survey, NormalizeLabel) {
    EXPECT_EQ(normalize_label("  Good-Bad \t"), "good-bad");
}

// --- synthetic world -------------------------------------------------------

TEST(Synthetic, NoiselessCosinesMatchGram) {
    SyntheticWorldSpec spec;
    spec.noise_sigma = 0.0;
    spec.seed = 5;
    const auto w = generate_synthetic_world(spec);
    const auto& l = w.truth.loadings;
    for (std::size_t i = 0; i < spec.n_axes; ++i)
        for (std::size_t j = 0; j < spec.n_axes; ++j) {
            double g = 0.0;
            for (std::size_t k = 0; k < spec.n_factors; ++k) g += l(i, k) * l(j, k);
            EXPECT_NEAR(cosine_similarity(w.axes[i].unit_vector, w.axes[j].unit_vector), g, 1e-8);
            EXPECT_NEAR(w.truth.planted_cosines(i, j), g, 1e-12);
        }
}

TEST(Synthetic, NoiselessSurveyCorrelationsMatchGram) {
    SyntheticWorldSpec spec;
    spec.noise_sigma = 0.0;
    spec.seed = 6;
    const auto w = generate_synthetic_world(spec);
    const auto c = column_correlations(w.survey.ratings);
    for (std::size_t i = 0; i < spec.n_axes; ++i)
        for (std::size_t j = 0; j < spec.n_axes; ++j)
            EXPECT_NEAR(c(i, j), w.truth.planted_cosines(i, j), 0.05);
}

TEST(Synthetic, RawScoresMonteCarlo) {
    // without whitening the finite-n deviation is sampling noise whose mean
    // absolute size at n = 360 is a few hundredths
    double total = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SyntheticWorldSpec spec;
        spec.noise_sigma = 0.0;
        spec.whiten_scores = false;
        spec.seed = seed;
        const auto w = generate_synthetic_world(spec);
        const auto c = column_correlations(w.survey.ratings);
        for (std::size_t i = 0; i < spec.n_axes; ++i)
            for (std::size_t j = i + 1; j < spec.n_axes; ++j) {
                total += std::abs(c(i, j) - w.truth.planted_cosines(i, j));
                ++count;
            }
    }
    EXPECT_LE(total / static_cast<double>(count), 0.05);
}

TEST(Synthetic, SeedRepeatAndSelfConsistency) {
    SyntheticWorldSpec spec;
    spec.seed = 7;
    spec.n_words = 40;
    spec.n_axes = 8;
    const auto a = generate_synthetic_world(spec);
    const auto b = generate_synthetic_world(spec);
    EXPECT_TRUE(a.survey.ratings == b.survey.ratings);
    EXPECT_TRUE(a.truth.axis_vectors == b.truth.axis_vectors);
    for (std::size_t i = 0; i < a.word_features.size(); ++i)
        EXPECT_EQ(a.word_features[i].vector, b.word_features[i].vector);

    // planted truths are the values actually used
    for (std::size_t j = 0; j < spec.n_axes; ++j)
        for (std::size_t c = 0; c < spec.dim; ++c)
            EXPECT_EQ(a.axes[j].vector[c], a.truth.axis_vectors(j, c));
    const auto ld = matmul(a.truth.loadings, a.truth.loadings.transpose());
    for (std::size_t i = 0; i < ld.data().size(); ++i)
        EXPECT_NEAR(ld.data()[i], a.truth.planted_cosines.data()[i], 1e-15);
    EXPECT_DOUBLE_EQ(a.truth.common_share, 1.0 / (1.0 + 0.04));
    for (const auto& f : a.word_features)
        for (double v : f.vector) EXPECT_EQ(v, static_cast<double>(static_cast<float>(v)));
    EXPECT_EQ(a.axes[0].axis_name, "p00-n00");
    EXPECT_EQ(a.word_features[0].word, "w00");
    ASSERT_EQ(a.axis_config[0].pairs.size(), spec.pairs_per_axis);

    spec.seed = 8;
    const auto c = generate_synthetic_world(spec);
    EXPECT_FALSE(a.survey.ratings == c.survey.ratings);
}

TEST(Synthetic, DegenerateSpecRejected) {
    SyntheticWorldSpec spec;
    spec.n_factors = 0;
    EXPECT_THROW(generate_synthetic_world(spec), Error);
    spec = {};
    spec.n_factors = 100;
    EXPECT_THROW(generate_synthetic_world(spec), Error);
    spec = {};
    spec.noise_sigma = -1;
    EXPECT_THROW(generate_synthetic_world(spec), Error);
}

// --- reports ---------------------------------------------------------------

TEST(Svg, ThreePointScatterCoordinates) {
    report::ScatterSpec s;
    s.title = "t";
    s.points = {{0.0, 0.0}, {1.0, 2.0}, {0.5, 1.0}};
    s.r = 1.0;
    const auto svg = report::scatter_svg(s);
    EXPECT_TRUE(svg.warnings.empty());
    std::size_t circles = 0;
    for (std::size_t at = svg.text.find("<circle"); at != std::string::npos;
         at = svg.text.find("<circle", at + 1))
        ++circles;
    EXPECT_EQ(circles, 3u);
    // oracle: x spans [0, 1] over 550 px from 70, y spans [0, 2] over 380 px up from 420
    for (auto [x, y] : s.points) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "cx=\"%.2f\" cy=\"%.2f\"", 70.0 + x * 550.0,
                      420.0 - y / 2.0 * 380.0);
        EXPECT_NE(svg.text.find(buf), std::string::npos) << buf;
    }
}

TEST(Svg, EmptyPlotWarns) {
    const auto svg = report::scatter_svg({"empty", "x", "y", {}, std::nullopt});
    EXPECT_EQ(svg.warnings.size(), 1u);
    EXPECT_NE(svg.text.find("<svg"), std::string::npos);
    EXPECT_NE(svg.text.find("</svg>"), std::string::npos);
    EXPECT_EQ(svg.text.find("<circle"), std::string::npos);
}

TEST(Svg, Deterministic) {
    report::ScatterSpec s{"t", "x", "y", {{0.1, 0.2}, {0.3, -0.4}}, 0.5};
    EXPECT_EQ(report::scatter_svg(s).text, report::scatter_svg(s).text);
    const Vector v{0.5, 0.3, 0.2};
    EXPECT_EQ(report::scree_svg("s", {{"a", v}}).text, report::scree_svg("s", {{"a", v}}).text);
    EXPECT_EQ(report::bar_svg("b", "y", {"a", "b", "c"}, v).text,
              report::bar_svg("b", "y", {"a", "b", "c"}, v).text);
}

TEST(Csv, FullPrecision) {
    const double x = 0.1 + 0.2;
    EXPECT_EQ(std::stod(report::format_double(x)), x);
    const auto m = DenseMatrix::from_rows({{1.0 / 3.0}});
    const auto csv = report::matrix_csv({"r"}, {"c"}, m, "axis");
    EXPECT_EQ(csv.substr(0, 7), "axis,c\n");
    EXPECT_EQ(std::stod(csv.substr(csv.find("r,") + 2)), 1.0 / 3.0);
}

// --- config files ----------------------------------------------------------

TEST(Config, AxisConfig) {
    const auto doc = nlohmann::json::parse(R"({"axes": [
        {"name": "good-bad", "pos_pole": "good", "neg_pole": "bad",
         "pairs": [["good", "bad"], ["great", "terrible"]]}]})");
    const auto sets = parse_axis_config(doc, 2);
    ASSERT_EQ(sets.size(), 1u);
    EXPECT_EQ(sets[0].pairs[1].second, "terrible");
    EXPECT_THROW(parse_axis_config(doc, 10), Error);
    EXPECT_EQ(parse_axis_config(axis_config_json(sets), 2)[0].pairs, sets[0].pairs);
}

TEST(Config, ShippedFilesParse) {
    const std::filesystem::path dir = SEMAXIS_CONFIG_DIR;
    EXPECT_EQ(read_axis_config(dir / "demo_axes.json").size(), 6u);
    EXPECT_EQ(read_prompt_set(dir / "prompts.json").size(), 4u);
    EXPECT_EQ(read_word_list(dir / "demo_words.txt").size(), 10u);
    const auto survey = require_complete(read_survey_csv(dir / "demo_survey.csv"));
    EXPECT_EQ(survey.words.size(), 10u);
    const auto doc = read_toy_config(dir / "toy_planted.json");
    EXPECT_EQ(doc.config.n_layers, 4u);
    EXPECT_EQ(doc.planted_names.size(), 6u);
}

TEST(Config, PromptSetNeedsFourSlots) {
    EXPECT_THROW(parse_prompt_set(nlohmann::json::parse(R"(["{word}", "{word}"])")), Error);
    EXPECT_THROW(parse_prompt_set(nlohmann::json::parse(R"(["{word}", "{word}", "{word}", "x"])")),
                 Error);
}

TEST(Config, WordListRejectsDuplicates) {
    const auto dir = scratch("words");
    std::ofstream(dir / "w.txt") << "# c\npiano\n\nfire\npiano\n";
    EXPECT_THROW(read_word_list(dir / "w.txt"), Error);
    std::ofstream(dir / "ok.txt") << "# c\npiano\n\nfire\n";
    EXPECT_EQ(read_word_list(dir / "ok.txt"), (std::vector<std::string>{"piano", "fire"}));
    std::filesystem::remove_all(dir);
}
