#include "examqa/prompt_engine.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "examqa/detail/utf8.hpp"

namespace examqa {

namespace {

// The reasoner prompt is contract text: downstream parsing and the
// compliance metric assume these exact words. Do not reword casually.
constexpr const char* kReasonerStrictBody =
    "You are given a multiple-choice question extracted from an exam.\n"
    "The question description is: {caption}\n"
    "\n"
    "Perform the following analysis:\n"
    "1. Carefully read and interpret the full question description provided in the caption.\n"
    "2. Identify the main question being asked.\n"
    "3. Extract all available answer options presented in the description.\n"
    "4. Pay close attention to any data mentioned (tables, diagrams, charts, graphs, "
    "chemical structures, etc.).\n"
    "5. Analyze all information in context.\n"
    "6. Select the correct answer based solely on your analysis of the provided description.\n"
    "\n"
    "Your final response MUST be ONLY the single letter of the correct answer option "
    "[\"A\", \"B\", \"C\", \"D\", or \"E\"] in English.\n"
    "Absolutely NO other text, explanation, reasoning, or formatting is allowed in your "
    "response. Just the letter.";

constexpr const char* kReasonerDescriptiveBody =
    "You are given a multiple-choice question extracted from an exam.\n"
    "The question description is: {caption}\n"
    "\n"
    "Read the full question description, identify the question being asked, and list the "
    "available answer options. Reason step by step about which option is best supported "
    "by the information provided, referencing any tables, diagrams, charts, graphs, or "
    "chemical structures mentioned in the description. Explain your reasoning in detail "
    "and conclude with the letter of the answer option you consider correct.";

constexpr const char* kDescriberBody =
    "You are an expert exam transcriber working from a scanned exam question.\n"
    "Extract the Question and all answer options, then provide a detailed, step-by-step "
    "description of every key visual element. Do not answer the question.\n"
    "\n"
    "Rules:\n"
    "- Preserve mathematical symbols, formulas, and subscripts exactly as printed.\n"
    "- Normalise answer-option markers such as \"(A)\", \"A.\", \"①\" to the form "
    "\"A.\", \"B.\", \"C.\", \"D.\", \"E.\".\n"
    "- If the answer options are unlabeled, label them A., B., C., ... in reading order.\n"
    "- Write the output in {language}.\n"
    "\n"
    "Item metadata:\n"
    "{metadata}\n"
    "\n"
    "Format the output exactly as:\n"
    "Question: <question text>\n"
    "Options:\n"
    "A. <option text>\n"
    "B. <option text>\n"
    "...\n"
    "Figure: <description of diagrams, tables, charts, or graphs; write \"none\" if there "
    "is no figure>";

constexpr const char* kAggregatorBody =
    "You are a meticulous verifier of exam-question transcriptions. You are given a draft "
    "caption of an exam question; when the original image is available it is attached "
    "alongside.\n"
    "\n"
    "The draft caption is between triple backticks:\n"
    "```\n"
    "{caption}\n"
    "```\n"
    "\n"
    "Verify and correct the draft:\n"
    "1. Correct answer-option label mismatches so the options are labeled A., B., C., ... "
    "in order, each on its own line.\n"
    "2. If the caption references a diagram, figure, or chart that is missing or not "
    "described, flag it by adding a line that starts with \"WARNING: missing diagram\".\n"
    "3. Translate any stray text that is not in {language} into {language}.\n"
    "\n"
    "Return the corrected caption in the same format (Question: / Options: / Figure:), "
    "written in {language}.";

constexpr const char* kTranslatorBody =
    "Translate the following multiple-choice exam item from {source_language} into "
    "{language}.\n"
    "\n"
    "Rules:\n"
    "- Do not answer or solve the question; translate it faithfully.\n"
    "- Keep the option labels A., B., C., ... and the option order exactly as given; "
    "translate only the texts.\n"
    "- Preserve mathematical symbols, numbers, units, and chemical formulas as printed.\n"
    "\n"
    "The item is between triple backticks:\n"
    "```\n"
    "{caption}\n"
    "```\n"
    "\n"
    "Return the translated item in the same format (Question: / Options: / Figure:).";

// Placeholder exemplar: the production few-shot example is curated per
// deployment; this one only demonstrates the expected output shape.
Exemplar placeholder_describer_shot() {
    Exemplar shot;
    shot.input =
        "[scanned exam item demo-001 (en): a physics question about a series circuit "
        "with a diagram and four options labeled (a) to (d)]";
    shot.output =
        "Question: What is the total resistance of the series circuit shown in the "
        "figure?\n"
        "Options:\n"
        "A. 2 Ω\n"
        "B. 4 Ω\n"
        "C. 6 Ω\n"
        "D. 8 Ω\n"
        "Figure: A series circuit with a 12 V battery and three resistors labeled "
        "R1 = 1 Ω, R2 = 2 Ω, R3 = 3 Ω connected end to end.";
    return shot;
}

bool placeholder_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string shots_block(std::span<const Exemplar> shots) {
    std::string out;
    for (const auto& shot : shots) {
        out += "Example input:\n";
        out += shot.input;
        out += "\nExample output:\n";
        out += shot.output;
        out += "\n\n";
    }
    return out;
}

}  // namespace

TemplateStore TemplateStore::with_builtins() {
    TemplateStore store;
    store.add({Role::describer, "v1", kDescriberBody, {placeholder_describer_shot()}});
    store.add({Role::aggregator, "v1", kAggregatorBody, {}});
    store.add({Role::reasoner, "strict_v1", kReasonerStrictBody, {}});
    store.add({Role::reasoner, "descriptive_v1", kReasonerDescriptiveBody, {}});
    store.add({Role::translator, "v1", kTranslatorBody, {}});
    return store;
}

void TemplateStore::add(PromptTemplate tmpl) {
    if (tmpl.role == Role::reasoner && !tmpl.shots.empty())
        throw PromptError(PromptErrorKind::bad_template_file,
                          "reasoner templates are zero-shot; shots not allowed");
    for (auto& existing : templates_) {
        if (existing.role == tmpl.role && existing.version == tmpl.version) {
            existing = std::move(tmpl);
            return;
        }
    }
    templates_.push_back(std::move(tmpl));
}

const PromptTemplate* TemplateStore::find(Role role, std::string_view version) const {
    for (const auto& t : templates_)
        if (t.role == role && t.version == version) return &t;
    return nullptr;
}

const PromptTemplate& TemplateStore::get(Role role, std::string_view version) const {
    const auto* t = find(role, version);
    if (!t)
        throw PromptError(PromptErrorKind::unknown_template,
                          std::string("no template for role ") + to_string(role) +
                              " version '" + std::string(version) + "'");
    return *t;
}

std::vector<std::string> TemplateStore::versions(Role role) const {
    std::vector<std::string> out;
    for (const auto& t : templates_)
        if (t.role == role) out.push_back(t.version);
    std::sort(out.begin(), out.end());
    return out;
}

void TemplateStore::load_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good())
        throw PromptError(PromptErrorKind::bad_template_file,
                          "cannot open template file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();

    if (content.rfind("---\n", 0) != 0)
        throw PromptError(PromptErrorKind::bad_template_file,
                          path.string() + ": missing front matter (expected leading ---)");
    const auto end = content.find("\n---\n", 4);
    if (end == std::string::npos)
        throw PromptError(PromptErrorKind::bad_template_file,
                          path.string() + ": unterminated front matter");
    const std::string front = content.substr(4, end - 4);
    std::string body = content.substr(end + 5);
    if (!body.empty() && body.back() == '\n') body.pop_back();

    PromptTemplate tmpl;
    try {
        YAML::Node node = YAML::Load(front);
        const auto role_name = node["role"].as<std::string>();
        auto role = role_from_string(role_name);
        if (!role)
            throw PromptError(PromptErrorKind::bad_template_file,
                              path.string() + ": unknown role '" + role_name + "'");
        tmpl.role = *role;
        tmpl.version = node["version"].as<std::string>();
        if (node["shots"]) {
            for (const auto& shot : node["shots"]) {
                Exemplar e;
                e.input = shot["input"].as<std::string>();
                e.output = shot["output"].as<std::string>();
                // strip the block-scalar trailing newline yaml adds
                if (!e.input.empty() && e.input.back() == '\n') e.input.pop_back();
                if (!e.output.empty() && e.output.back() == '\n') e.output.pop_back();
                tmpl.shots.push_back(std::move(e));
            }
        }
    } catch (const YAML::Exception& e) {
        throw PromptError(PromptErrorKind::bad_template_file,
                          path.string() + ": front matter: " + e.what());
    }
    tmpl.body = std::move(body);
    add(std::move(tmpl));
}

std::size_t TemplateStore::load_directory(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".prompt")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) load_file(f);
    return files.size();
}

std::string default_template_version(Role role) {
    return role == Role::reasoner ? "strict_v1" : "v1";
}

std::string render_template_body(std::string_view body,
                                 const std::map<std::string, std::string>& bindings) {
    std::string out;
    out.reserve(body.size());
    std::size_t i = 0;
    while (i < body.size()) {
        const char c = body[i];
        if (c != '{') {
            out.push_back(c);
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < body.size() && placeholder_char(body[j])) ++j;
        if (j > i + 1 && j < body.size() && body[j] == '}') {
            const std::string name(body.substr(i + 1, j - i - 1));
            auto it = bindings.find(name);
            if (it == bindings.end())
                throw PromptError(PromptErrorKind::unresolved_placeholder,
                                  "unresolved placeholder {" + name + "}");
            out += it->second;  // spliced literally, never re-scanned
            i = j + 1;
        } else {
            out.push_back(c);  // lone brace, not a placeholder
            ++i;
        }
    }
    return out;
}

std::string format_item_metadata(const ExamItem& item) {
    std::ostringstream out;
    out << "sample_id: " << item.sample_id << '\n';
    out << "subject: " << item.subject << '\n';
    out << "type: " << to_string(item.item_type) << '\n';
    out << "grade: " << item.grade << '\n';
    out << "language: " << language_display_name(item.language) << " (" << item.language
        << ")";
    for (const auto& [key, value] : item.extra) out << '\n' << key << ": " << value;
    return out.str();
}

namespace {

RenderedPrompt render_with(const PromptTemplate& tmpl,
                           std::map<std::string, std::string> bindings,
                           std::span<const Exemplar> shots) {
    RenderedPrompt prompt;
    prompt.role = tmpl.role;
    prompt.template_version = tmpl.version;
    prompt.text = shots_block(shots) + render_template_body(tmpl.body, bindings);
    prompt.bound_values = std::move(bindings);
    return prompt;
}

}  // namespace

RenderedPrompt render_describer(const TemplateStore& store, const ExamItem& item,
                                std::span<const Exemplar> shots, std::string_view version) {
    if (item.language.empty())
        throw PromptError(PromptErrorKind::missing_language,
                          "item " + item.sample_id + " has no language metadata");
    const auto& tmpl = store.get(Role::describer, version);
    std::map<std::string, std::string> bindings{
        {"language", language_display_name(item.language)},
        {"metadata", format_item_metadata(item)},
    };
    return render_with(tmpl, std::move(bindings), shots);
}

RenderedPrompt render_describer(const TemplateStore& store, const ExamItem& item,
                                std::string_view version) {
    const auto& tmpl = store.get(Role::describer, version);
    return render_describer(store, item, tmpl.shots, version);
}

RenderedPrompt render_aggregator(const TemplateStore& store, const ExamItem& item,
                                 const Caption& draft, std::string_view version) {
    std::string caption_text =
        draft.raw_text.empty() ? format_caption_text(draft) : draft.raw_text;
    if (detail::trim_ascii(caption_text).empty())
        throw PromptError(PromptErrorKind::empty_caption,
                          "empty draft caption for item " + item.sample_id);
    const auto& tmpl = store.get(Role::aggregator, version);
    std::map<std::string, std::string> bindings{
        {"caption", std::move(caption_text)},
        {"language", language_display_name(item.language)},
    };
    return render_with(tmpl, std::move(bindings), tmpl.shots);
}

RenderedPrompt render_reasoner(const TemplateStore& store, std::string_view caption_text,
                               std::string_view version) {
    if (detail::trim_ascii(caption_text).empty())
        throw PromptError(PromptErrorKind::empty_caption, "empty caption for reasoner");
    const auto& tmpl = store.get(Role::reasoner, version);
    std::map<std::string, std::string> bindings{
        {"caption", std::string(caption_text)},
    };
    return render_with(tmpl, std::move(bindings), {});
}

RenderedPrompt render_translator(const TemplateStore& store, std::string_view item_text,
                                 std::string_view source_language,
                                 std::string_view target_language, std::string_view version) {
    if (detail::trim_ascii(item_text).empty())
        throw PromptError(PromptErrorKind::empty_caption, "empty item text for translator");
    const auto& tmpl = store.get(Role::translator, version);
    std::map<std::string, std::string> bindings{
        {"caption", std::string(item_text)},
        {"source_language", language_display_name(source_language)},
        {"language", language_display_name(target_language)},
    };
    return render_with(tmpl, std::move(bindings), tmpl.shots);
}

}  // namespace examqa
