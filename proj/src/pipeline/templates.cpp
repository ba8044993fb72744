#include "prefforge/pipeline/templates.hpp"

#include "builtin_templates.hpp"

#include <fstream>
#include <sstream>

namespace prefforge::pipeline {

namespace {

bool is_name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// Walks `text`, calling on_literal for literal runs and on_placeholder for
// each {name}.
template <class Literal, class Placeholder>
void scan(std::string_view text, Literal&& on_literal, Placeholder&& on_placeholder) {
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == '{') {
            if (i + 1 < text.size() && text[i + 1] == '{') {
                on_literal(std::string_view("{"));
                i += 2;
                continue;
            }
            const auto close = text.find('}', i + 1);
            if (close == std::string_view::npos) {
                throw TemplateError("unterminated placeholder at offset " + std::to_string(i));
            }
            const auto name = text.substr(i + 1, close - i - 1);
            if (name.empty()) throw TemplateError("empty placeholder at offset " + std::to_string(i));
            for (char n : name) {
                if (!is_name_char(n)) {
                    throw TemplateError("invalid placeholder name '" + std::string(name) + "' at offset " +
                                        std::to_string(i) + " (use {{ and }} for literal braces)");
                }
            }
            on_placeholder(name);
            i = close + 1;
            continue;
        }
        if (c == '}') {
            if (i + 1 < text.size() && text[i + 1] == '}') {
                on_literal(std::string_view("}"));
                i += 2;
                continue;
            }
            throw TemplateError("stray '}' at offset " + std::to_string(i));
        }
        const auto next = text.find_first_of("{}", i);
        const auto end = next == std::string_view::npos ? text.size() : next;
        on_literal(text.substr(i, end - i));
        i = end;
    }
}

std::string builtin_text(std::string_view key) {
    const auto& table = builtin::template_texts();
    auto it = table.find(key);
    if (it == table.end()) throw TemplateError("no built-in template '" + std::string(key) + "'");
    std::string text(it->second);
    if (text.ends_with('\n')) text.pop_back();
    return text;
}

}  // namespace

std::vector<std::string> placeholders(std::string_view text) {
    std::vector<std::string> names;
    scan(
        text, [](std::string_view) {},
        [&](std::string_view name) {
            for (const auto& existing : names) {
                if (existing == name) return;
            }
            names.emplace_back(name);
        });
    return names;
}

std::string render(std::string_view text, const TemplateVars& vars) {
    std::string out;
    out.reserve(text.size());
    scan(
        text, [&](std::string_view literal) { out.append(literal); },
        [&](std::string_view name) {
            auto it = vars.find(std::string(name));
            if (it == vars.end()) throw TemplateError("unbound placeholder {" + std::string(name) + "}");
            out.append(it->second);
        });
    return out;
}

PlaceholderRules placeholder_rules(provider::StageTag tag) {
    using provider::StageTag;
    switch (tag) {
        case StageTag::enhance: return {{"q_raw"}, {"q_raw"}};
        case StageTag::reject: return {{"q_raw", "q_enhanced"}, {"q_enhanced"}};
        case StageTag::cot: return {{"q_raw", "q_enhanced", "rag_content"}, {"q_enhanced", "rag_content"}};
        case StageTag::answer:
            return {{"q_raw", "q_enhanced", "rag_content", "reasoning_w"}, {"q_raw", "rag_content", "reasoning_w"}};
        case StageTag::judge: return {{"question", "answer", "reference", "model_id"}, {"question", "answer"}};
    }
    return {};
}

void check_template(const PromptTemplate& tmpl, provider::StageTag tag) {
    const auto rules = placeholder_rules(tag);
    std::set<std::string> seen;
    for (const auto* text : {&tmpl.system, &tmpl.user}) {
        for (auto& name : placeholders(*text)) {
            if (!rules.allowed.contains(name)) {
                throw TemplateError("template '" + tmpl.name + "' uses {" + name + "}, which stage " +
                                    std::string(provider::tag_name(tag)) + " does not provide");
            }
            seen.insert(name);
        }
    }
    for (const auto& name : rules.required) {
        if (!seen.contains(name)) {
            throw TemplateError("template '" + tmpl.name + "' must reference {" + name + "}");
        }
    }
}

PromptTemplate builtin_template(provider::StageTag tag) {
    const std::string stem(provider::tag_name(tag));
    return {stem, builtin_text(stem + "_system"), builtin_text(stem + "_user")};
}

std::string builtin_cot_repair_instruction() { return builtin_text("cot_repair"); }

std::string load_template_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TemplateError("cannot read template " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    if (text.ends_with('\n')) text.pop_back();
    return text;
}

}  // namespace prefforge::pipeline
