#pragma once

#include "prefforge/provider/types.hpp"

#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace prefforge::pipeline {

class TemplateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A prompt pair with {name} placeholders. "{{" and "}}" are literal braces.
struct PromptTemplate {
    std::string name;
    std::string system;
    std::string user;
};

using TemplateVars = std::map<std::string, std::string>;

// Placeholder names referenced by `text`, in order of first appearance.
// Throws TemplateError on an unbalanced or empty brace.
std::vector<std::string> placeholders(std::string_view text);

// Substitutes every placeholder. Values are inserted verbatim and never
// re-scanned. Throws TemplateError when a placeholder has no binding.
std::string render(std::string_view text, const TemplateVars& vars);

struct PlaceholderRules {
    std::set<std::string> allowed;
    std::set<std::string> required;  // must appear in system or user text
};

PlaceholderRules placeholder_rules(provider::StageTag tag);

// Throws TemplateError when the template references a placeholder its stage
// does not bind, or omits one the stage requires.
void check_template(const PromptTemplate& tmpl, provider::StageTag tag);

// Built-in template for a stage, from the shipped text assets.
PromptTemplate builtin_template(provider::StageTag tag);

// Instruction appended when a reasoning-chain reply has to be re-requested.
std::string builtin_cot_repair_instruction();

// Reads a template text file, dropping one trailing newline.
std::string load_template_text(const std::filesystem::path& path);

}  // namespace prefforge::pipeline
