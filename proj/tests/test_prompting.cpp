#include <gtest/gtest.h>

#include "golden_cases.hpp"
#include "ragmt/error.hpp"
#include "ragmt/prompting.hpp"
#include "tempdir.hpp"

using namespace ragmt;

namespace {

std::string golden_text(const std::string& name)
{
    return testutil::read_file(std::filesystem::path(RAGMT_GOLDEN_DIR) / name);
}

const LanguageNames kNames;

}  // namespace

TEST(Templates, GoldenBaseline)
{
    const auto prompt = render_baseline(golden::kRedMugTitle, golden::kEnDe, kNames);
    EXPECT_EQ(prompt.text, golden_text("template_a_red_mug_en_de.txt"));
    EXPECT_EQ(prompt.template_id, TemplateId::A);
    EXPECT_TRUE(prompt.example_ids.empty());
}

TEST(Templates, GoldenFiveShot)
{
    const auto examples = golden::shock_examples();
    const auto prompt = render_fewshot(golden::kShockTitle, golden::kEnDe, kNames, examples);
    EXPECT_EQ(prompt.text, golden_text("template_b_k5_en_de.txt"));
    EXPECT_EQ(prompt.example_ids, (std::vector<std::uint32_t>{0, 1, 2, 3, 4}));
}

TEST(Templates, GoldenOneShot)
{
    const auto examples = golden::mumbi_examples();
    const auto prompt = render_fewshot(golden::kMumbiTitle, golden::kEnDe, kNames, examples);
    EXPECT_EQ(prompt.text, golden_text("template_b_k1_en_de.txt"));
}

TEST(Templates, FiveShotReconstructsAsset)
{
    // Rendering the placeholders as their own values must give back the asset.
    LanguageNames names;
    names.set("xa", "<source language e.g. English>");
    names.set("xb", "<target language>");
    std::vector<BilingualPair> examples(5);
    for (auto& e : examples) {
        e.src_text = "<source title>";
        e.tgt_text = "<title translation>";
    }
    const auto prompt = render_fewshot("<title in the source language>", {"xa", "xb"}, names, examples);
    EXPECT_EQ(prompt.text, template_text(TemplateId::B));

    const auto baseline = render_baseline("<title in the source language>", {"xa", "xb"}, names);
    EXPECT_EQ(baseline.text, template_text(TemplateId::A));
}

TEST(Templates, NoPlaceholderLeftBehind)
{
    const auto examples = golden::shock_examples();
    for (std::size_t k = 1; k <= 5; ++k) {
        const auto prompt =
            render_fewshot(golden::kShockTitle, golden::kEnDe, kNames, std::span(examples).first(k));
        for (const auto* placeholder : {"<source language>", "<target language>", "<title in the source language>",
                                        "<source title>", "<title translation>"})
            EXPECT_EQ(prompt.text.find(placeholder), std::string::npos) << placeholder;
        EXPECT_NE(prompt.text.find("<translation>"), std::string::npos);
        EXPECT_NE(prompt.text.find("Example " + std::to_string(k) + ": "), std::string::npos);
        EXPECT_EQ(prompt.text.find("Example " + std::to_string(k + 1) + ": "), std::string::npos);
    }
}

TEST(Templates, TitleTextIsInsertedVerbatim)
{
    const std::string title = "Example 2: <target language> {\"translation\": x}";
    const auto prompt = render_baseline(title, golden::kEnDe, kNames);
    EXPECT_NE(prompt.text.find(title), std::string::npos);
    std::vector<BilingualPair> examples{{0, "Example 3: tricky", "<source title>", Domain::TTL, golden::kEnDe}};
    const auto fewshot = render_fewshot(title, golden::kEnDe, kNames, examples);
    EXPECT_NE(fewshot.text.find("translation: <source title>"), std::string::npos);
}

TEST(Templates, Errors)
{
    EXPECT_THROW(render_baseline("", golden::kEnDe, kNames), ConfigError);
    EXPECT_THROW(render_baseline("  ", golden::kEnDe, kNames), ConfigError);
    EXPECT_THROW(render_baseline("x", {"en", "xx"}, kNames), ConfigError);
    EXPECT_THROW(render_fewshot("x", golden::kEnDe, kNames, {}), ConfigError);
}

TEST(Templates, RenderPromptFallsBackToBaseline)
{
    const auto prompt = render_prompt("Red Mug", golden::kEnDe, kNames, {}, 5);
    EXPECT_EQ(prompt.template_id, TemplateId::A);
    EXPECT_EQ(prompt.requested_k, 5u);
}

TEST(LanguageNamesTest, BuiltIns)
{
    EXPECT_EQ(kNames.name("de"), "German");
    EXPECT_EQ(kNames.name("sv"), "Swedish");
    EXPECT_EQ(kNames.name("tr"), "Turkish");
    EXPECT_FALSE(kNames.contains("xx"));
}

TEST(ShotModeTest, ParseAndKeys)
{
    EXPECT_EQ(ShotMode::parse("rag5"), ShotMode::rag(5));
    EXPECT_EQ(ShotMode::parse("RAND-1"), ShotMode::rand(1));
    EXPECT_EQ(ShotMode::parse("baseline"), ShotMode::baseline());
    EXPECT_EQ(ShotMode::rag(5).key(), "rag-5");
    EXPECT_EQ(ShotMode::rand(1).label(), "RAND 1-shot");
    EXPECT_THROW(ShotMode::parse("rag"), ConfigError);
    EXPECT_THROW(ShotMode::parse("top5"), ConfigError);
    EXPECT_THROW(ShotMode::rag(0), ConfigError);
}

TEST(SelectExamples, Modes)
{
    const auto pairs = golden::shock_examples();
    const auto index = build_index(pairs, golden::kEnDe, Domain::TTL);
    const ExampleSource source{&index, pairs, Domain::TTL, {}};

    EXPECT_TRUE(select_examples(ShotMode::baseline(), source, golden::kShockTitle, 1).empty());

    const auto rag1 = select_examples(ShotMode::rag(1), source, golden::kShockTitle, 1);
    ASSERT_EQ(rag1.size(), 1u);
    EXPECT_EQ(rag1[0], index.search(golden::kShockTitle, 1)[0].pair);

    const auto rand_a = select_examples(ShotMode::rand(3), source, golden::kShockTitle, 99);
    const auto rand_b = select_examples(ShotMode::rand(3), source, golden::kShockTitle, 99);
    EXPECT_EQ(rand_a, rand_b);
    EXPECT_EQ(rand_a.size(), 3u);

    const ExampleSource no_index{nullptr, pairs, Domain::TTL, {}};
    EXPECT_THROW(select_examples(ShotMode::rag(1), no_index, "x", 1), ConfigError);
}

TEST(SelectExamples, RagShortfallRendersWhatCameBack)
{
    const auto pairs = golden::shock_examples();
    const auto index = build_index(pairs, golden::kEnDe, Domain::TTL);
    const ExampleSource source{&index, {}, Domain::TTL, {}};
    const auto hits = select_examples(ShotMode::rag(5), source, "Monroe", 0);
    ASSERT_EQ(hits.size(), 1u);
    const auto prompt = render_prompt("Monroe", golden::kEnDe, kNames, hits, 5);
    EXPECT_EQ(prompt.template_id, TemplateId::B);
    EXPECT_EQ(prompt.examples.size(), 1u);
    EXPECT_EQ(prompt.requested_k, 5u);
}
