#include "fakes.hpp"

#include "prefforge/pipeline/config.hpp"
#include "prefforge/pipeline/templates.hpp"
#include "prefforge/provider/http_client.hpp"

#include <doctest.h>

using namespace prefforge::pipeline;
using prefforge::provider::StageTag;

TEST_SUITE("config") {

TEST_CASE("parses the TOML subset") {
    const auto file = ConfigFile::parse(R"(
# comment
[pipeline]
concurrency = 8          # trailing comment
think_directive = " /think"
empty_retrieval = 'proceed_without_rag'

[retry]
jitter = 0.1
base_delay_ms = 1_000

[providers.main]
kind = "openai"
base_url = "https://example.invalid/v1#not-a-comment"
)");
    CHECK(file.get_int("pipeline.concurrency") == 8);
    CHECK(file.get_string("pipeline.think_directive") == " /think");
    CHECK(file.get_string("pipeline.empty_retrieval") == "proceed_without_rag");
    CHECK(file.get_double("retry.jitter") == doctest::Approx(0.1));
    CHECK(file.get_int("retry.base_delay_ms") == 1000);
    CHECK(file.get_double("retry.base_delay_ms") == 1000.0);
    CHECK(file.get_string("providers.main.base_url") == "https://example.invalid/v1#not-a-comment");
    CHECK(file.tables_under("providers") == std::vector<std::string>{"main"});
    CHECK_THROWS_AS((void)file.get_string("pipeline.concurrency"), ConfigError);
}

TEST_CASE("syntax errors name the line") {
    try {
        (void)ConfigFile::parse("[pipeline]\nconcurrency 4\n");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(ConfigFile::parse("a = \"unterminated\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse("[x]\na = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse("[[x]]\n"), ConfigError);
}

TEST_CASE("empty config builds the offline mock setup") {
    const auto config = build_pipeline_config(ConfigFile{});
    CHECK(config.concurrency == 4);
    CHECK(config.empty_retrieval == EmptyRetrievalPolicy::skip_record);
    CHECK(config.prompt_source == PromptSource::enhanced);
    CHECK(config.think_directive == " /think");
    CHECK(config.enhance.generator->id() == "mock");
    CHECK(config.retriever->id() == "mock");
}

TEST_CASE("unknown keys and bad values are rejected") {
    CHECK_THROWS_AS(build_pipeline_config(ConfigFile::parse("[pipeline]\nconcurency = 2\n")), ConfigError);
    CHECK_THROWS_AS(build_pipeline_config(ConfigFile::parse("[pipeline]\nconcurrency = 0\n")), ConfigError);
    CHECK_THROWS_AS(build_pipeline_config(ConfigFile::parse("[stages.enhance]\nprovider = \"nope\"\n")), ConfigError);
    CHECK_THROWS_AS(build_pipeline_config(ConfigFile::parse("[providers.x]\nkind = \"openai\"\n")), ConfigError);
    CHECK_THROWS_AS(build_pipeline_config(ConfigFile::parse("[retry]\njitter = 1.5\n")), ConfigError);
    CHECK_THROWS_AS(build_pipeline_config(ConfigFile::parse("[stages.bogus]\nprovider = \"mock\"\n")), ConfigError);
}

TEST_CASE("credentials come from the environment") {
    const auto file = ConfigFile::parse(R"(
[pipeline]
default_provider = "main"
[providers.main]
kind = "openai"
base_url = "http://127.0.0.1:9/v1"
model = "m"
api_key_env = "MY_KEY"
)");
    std::vector<std::string> asked;
    BuildOptions options;
    options.getenv = [&](const std::string& name) -> std::optional<std::string> {
        asked.push_back(name);
        return "k";
    };
    const auto config = build_pipeline_config(file, options);
    CHECK(config.enhance.generator->id() == "main");
    CHECK(std::find(asked.begin(), asked.end(), "MY_KEY") != asked.end());

    options.provider_override = "mock";
    CHECK(build_pipeline_config(file, options).enhance.generator->id() == "mock");
}

TEST_CASE("stage templates can be replaced from files") {
    testing::TempDir dir;
    testing::write_file(dir / "sys.txt", "Rewrite.\n");
    testing::write_file(dir / "user.txt", "Q: {q_raw}\n");
    testing::write_file(dir / "bad.txt", "Q: {rag_content}\n");
    testing::write_file(dir / "a.toml", "[stages.enhance]\nsystem_template = \"sys.txt\"\nuser_template = \"user.txt\"\n");
    testing::write_file(dir / "b.toml", "[stages.enhance]\nuser_template = \"bad.txt\"\n");
    const auto config = build_pipeline_config(ConfigFile::load(dir / "a.toml"));
    CHECK(config.enhance.prompt.system == "Rewrite.");
    CHECK(config.enhance.prompt.user == "Q: {q_raw}");
    CHECK_THROWS_AS(build_pipeline_config(ConfigFile::load(dir / "b.toml")), ConfigError);
}

TEST_CASE("template rendering") {
    CHECK(render("Q: {q_raw}!", {{"q_raw", "abc"}}) == "Q: abc!");
    CHECK(render("{{\"k\": {v}}}", {{"v", "1"}}) == "{\"k\": 1}");
    // Values are inserted verbatim, never re-scanned.
    CHECK(render("{a}", {{"a", "{b}"}}) == "{b}");
    CHECK_THROWS_AS(render("{missing}", {}), TemplateError);
    CHECK_THROWS_AS(render("{open", {}), TemplateError);
    CHECK_THROWS_AS(render("close}", {}), TemplateError);
    CHECK(placeholders("{a} {b} {a} {{c}}") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("built-in templates fit their stages and render without residual braces") {
    const TemplateVars all = {{"q_raw", "R"},      {"q_enhanced", "E"}, {"rag_content", "K"}, {"reasoning_w", "W"},
                              {"question", "Q"},   {"answer", "A"},     {"reference", "F"},   {"model_id", "M"}};
    for (auto tag : {StageTag::enhance, StageTag::reject, StageTag::cot, StageTag::answer, StageTag::judge}) {
        const auto tmpl = builtin_template(tag);
        CHECK_NOTHROW(check_template(tmpl, tag));
        for (const auto* text : {&tmpl.system, &tmpl.user}) {
            const auto rendered = render(*text, all);
            // Only the judge's JSON example may keep literal braces.
            if (tag != StageTag::judge) {
                CHECK(rendered.find('{') == std::string::npos);
                CHECK(rendered.find('}') == std::string::npos);
            }
        }
    }
    CHECK_FALSE(builtin_cot_repair_instruction().empty());
}

TEST_CASE("shipped example configs build") {
    const std::filesystem::path dir = PREFFORGE_SOURCE_DIR "/config";
    CHECK(build_pipeline_config(ConfigFile::load(dir / "mock.toml")).enhance.generator->id() == "mock");
    BuildOptions options;
    options.getenv = [](const std::string&) -> std::optional<std::string> { return "k"; };
    const auto remote = build_pipeline_config(ConfigFile::load(dir / "openai.toml"), options);
    CHECK(remote.reject.generator->id() == "small");
    CHECK(remote.cot.generator->id() == "main");
    CHECK(remote.retriever->id() != "mock");
}

TEST_CASE("template placeholder rules") {
    PromptTemplate t{"x", "system", "{q_raw}"};
    CHECK_NOTHROW(check_template(t, StageTag::enhance));
    t.user = "{reasoning_w}";
    CHECK_THROWS_AS(check_template(t, StageTag::enhance), TemplateError);
    t.user = "no placeholders";
    CHECK_THROWS_AS(check_template(t, StageTag::enhance), TemplateError);
}

}  // TEST_SUITE
