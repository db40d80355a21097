#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "examqa/caption.hpp"
#include "examqa/dataset.hpp"
#include "examqa/role.hpp"

namespace examqa {

struct Exemplar {
    std::string input;
    std::string output;
};

// Versioned prompt template. Placeholders use {name} syntax and are
// spliced literally at render time; spliced values are never re-expanded.
struct PromptTemplate {
    Role role = Role::describer;
    std::string version;
    std::string body;
    std::vector<Exemplar> shots;  // prepended verbatim; reasoner templates carry none
};

struct RenderedPrompt {
    std::string text;
    Role role = Role::describer;
    std::string template_version;
    std::map<std::string, std::string> bound_values;
};

enum class PromptErrorKind {
    missing_language,
    empty_caption,
    unknown_template,
    unresolved_placeholder,
    bad_template_file,
};

class PromptError : public std::runtime_error {
public:
    PromptError(PromptErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    PromptErrorKind kind() const { return kind_; }

private:
    PromptErrorKind kind_;
};

// Holds the built-in templates plus any loaded from disk. Templates are
// immutable once stored; lookups are by (role, version).
class TemplateStore {
public:
    // Ships describer "v1", aggregator "v1", reasoner "strict_v1" and
    // "descriptive_v1", translator "v1".
    static TemplateStore with_builtins();

    void add(PromptTemplate tmpl);  // replaces an existing (role, version)
    const PromptTemplate* find(Role role, std::string_view version) const;
    const PromptTemplate& get(Role role, std::string_view version) const;
    std::vector<std::string> versions(Role role) const;

    // Template files carry a YAML front matter block (role, version,
    // optional shots) between "---" lines; the rest of the file is the
    // body. One trailing newline is not part of the body.
    void load_file(const std::filesystem::path& path);
    std::size_t load_directory(const std::filesystem::path& dir);  // *.prompt files

private:
    std::vector<PromptTemplate> templates_;
};

// Default version per role when a config does not pin one.
std::string default_template_version(Role role);

// Literal single-pass substitution. Throws on {placeholders} without a
// binding; braces inside bound values are inert.
std::string render_template_body(std::string_view body,
                                 const std::map<std::string, std::string>& bindings);

RenderedPrompt render_describer(const TemplateStore& store, const ExamItem& item,
                                std::span<const Exemplar> shots,
                                std::string_view version = "v1");
// Convenience: uses the template's own configured shots.
RenderedPrompt render_describer(const TemplateStore& store, const ExamItem& item,
                                std::string_view version = "v1");

RenderedPrompt render_aggregator(const TemplateStore& store, const ExamItem& item,
                                 const Caption& draft, std::string_view version = "v1");

RenderedPrompt render_reasoner(const TemplateStore& store, std::string_view caption_text,
                               std::string_view version = "strict_v1");

RenderedPrompt render_translator(const TemplateStore& store, std::string_view item_text,
                                 std::string_view source_language,
                                 std::string_view target_language,
                                 std::string_view version = "v1");

// Metadata block bound into describer prompts.
std::string format_item_metadata(const ExamItem& item);

}  // namespace examqa
