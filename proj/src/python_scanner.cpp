#include "rpg/python_scanner.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>

namespace rpg {

namespace {

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

const char* kKeywords[] = {"and",    "or",     "not",   "if",     "elif",   "else",  "while",
                           "for",    "in",     "is",    "def",    "class",  "return", "yield",
                           "lambda", "with",   "as",    "import", "from",   "try",   "except",
                           "finally", "raise", "assert", "del",   "pass",   "break", "continue",
                           "global", "nonlocal", "await", "async", "True",  "False", "None"};

bool is_keyword(const std::string& word) {
    for (const char* kw : kKeywords) {
        if (word == kw) return true;
    }
    return false;
}

// One source line with string literals and comments blanked out. Offsets are
// preserved so column positions stay meaningful.
struct MaskedLine {
    std::string text;
    int line = 0;
};

struct MaskResult {
    std::vector<MaskedLine> lines;
    bool ok = true;
    std::string error;
};

MaskResult mask_source(const std::string& source) {
    MaskResult out;
    std::string current;
    int line_no = 1;

    enum class Mode { Code, Str };
    Mode mode = Mode::Code;
    char quote = 0;
    bool triple = false;
    bool comment = false;

    auto flush_line = [&]() {
        out.lines.push_back({current, line_no});
        current.clear();
        ++line_no;
        comment = false;
        if (mode == Mode::Str && !triple) {
            mode = Mode::Code;  // unterminated single-quoted string: tolerate
        }
    };

    for (size_t i = 0; i < source.size(); ++i) {
        char c = source[i];
        if (c == '\n') {
            flush_line();
            continue;
        }
        if (comment) {
            current.push_back(' ');
            continue;
        }
        if (mode == Mode::Str) {
            if (c == '\\' && !triple) {
                current.push_back(' ');
                if (i + 1 < source.size() && source[i + 1] != '\n') {
                    current.push_back(' ');
                    ++i;
                }
                continue;
            }
            if (c == quote) {
                if (!triple) {
                    mode = Mode::Code;
                    current.push_back(' ');
                    continue;
                }
                if (i + 2 < source.size() && source[i + 1] == quote && source[i + 2] == quote) {
                    mode = Mode::Code;
                    current.append("   ");
                    i += 2;
                    continue;
                }
            }
            current.push_back(' ');
            continue;
        }
        // code
        if (c == '#') {
            comment = true;
            current.push_back(' ');
            continue;
        }
        if (c == '\'' || c == '"') {
            quote = c;
            triple = i + 2 < source.size() && source[i + 1] == c && source[i + 2] == c;
            mode = Mode::Str;
            if (triple) {
                current.append("   ");
                i += 2;
            } else {
                current.push_back(' ');
            }
            continue;
        }
        current.push_back(c);
    }
    if (!current.empty() || source.empty() || source.back() != '\n') {
        out.lines.push_back({current, line_no});
    }
    if (mode == Mode::Str && triple) {
        out.ok = false;
        out.error = "unterminated triple-quoted string";
    }
    return out;
}

struct LogicalLine {
    std::string text;  // masked, physical lines joined by single spaces
    int first_line = 0;
    int last_line = 0;
    int indent = 0;
};

int indent_of(const std::string& text) {
    int n = 0;
    for (char c : text) {
        if (c == ' ' || c == '\t') {
            ++n;
        } else {
            break;
        }
    }
    return n;
}

bool blank(const std::string& text) {
    return std::all_of(text.begin(), text.end(),
                       [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
}

std::vector<LogicalLine> assemble_logical_lines(const std::vector<MaskedLine>& lines) {
    std::vector<LogicalLine> logical;
    int depth = 0;
    LogicalLine current;
    bool open = false;

    for (const auto& line : lines) {
        std::string text = line.text;
        bool continuation = false;
        for (char c : text) {
            if (c == '(' || c == '[' || c == '{') ++depth;
            if (c == ')' || c == ']' || c == '}') --depth;
        }
        // explicit backslash continuation
        size_t last = text.find_last_not_of(" \t");
        if (last != std::string::npos && text[last] == '\\') {
            text.erase(last);
            continuation = true;
        }
        if (!open) {
            if (blank(text) && depth <= 0 && !continuation) {
                depth = std::max(depth, 0);
                continue;
            }
            current = LogicalLine{text, line.line, line.line, indent_of(text)};
            open = true;
        } else {
            current.text += ' ';
            current.text += text;
            current.last_line = line.line;
        }
        if (depth <= 0 && !continuation) {
            depth = std::max(depth, 0);
            logical.push_back(current);
            open = false;
        }
    }
    if (open) {
        logical.push_back(current);  // unbalanced brackets at EOF: take as-is
    }
    return logical;
}

std::string trim(const std::string& text) {
    size_t a = text.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = text.find_last_not_of(" \t");
    return text.substr(a, b - a + 1);
}

// Matches "<ident>" or "async <ident>" heads.
std::optional<std::string> match_head(const std::string& trimmed, const std::string& head) {
    std::string rest = trimmed;
    if (rest.rfind("async ", 0) == 0 && head == "def") {
        rest = trim(rest.substr(6));
    }
    if (rest.rfind(head, 0) != 0) return std::nullopt;
    size_t pos = head.size();
    if (pos >= rest.size() || (rest[pos] != ' ' && rest[pos] != '\t')) return std::nullopt;
    return rest.substr(pos + 1);
}

std::optional<std::string> leading_identifier(const std::string& text, size_t* end = nullptr) {
    size_t i = 0;
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i >= text.size() || !is_ident_start(text[i])) return std::nullopt;
    size_t start = i;
    while (i < text.size() && is_ident_char(text[i])) ++i;
    if (end) *end = i;
    return text.substr(start, i - start);
}

std::optional<std::string> leading_dotted(const std::string& text, size_t* end = nullptr) {
    size_t i = 0;
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i >= text.size() || !is_ident_start(text[i])) return std::nullopt;
    size_t start = i;
    while (i < text.size() && (is_ident_char(text[i]) || text[i] == '.')) ++i;
    while (i > start && text[i - 1] == '.') --i;
    if (end) *end = i;
    return text.substr(start, i - start);
}

bool full_dotted_name(const std::string& text) {
    if (text.empty() || !is_ident_start(text[0])) return false;
    bool prev_dot = false;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '.') {
            if (prev_dot || i == 0) return false;
            prev_dot = true;
        } else if (is_ident_char(c)) {
            prev_dot = false;
        } else {
            return false;
        }
    }
    return !prev_dot;
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> parts;
    int depth = 0;
    std::string current;
    for (char c : text) {
        if (c == '(' || c == '[' || c == '{') ++depth;
        if (c == ')' || c == ']' || c == '}') --depth;
        if (c == ',' && depth == 0) {
            parts.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!trim(current).empty()) parts.push_back(trim(current));
    return parts;
}

// Extracts `name(` reference tokens from masked text. Tokens immediately
// preceded by '.' are attribute calls on arbitrary expressions and are not
// lexically resolvable, so they are skipped.
void extract_calls(const std::string& text, int line, int entity, std::vector<PyReference>& out) {
    size_t i = 0;
    while (i < text.size()) {
        if (!is_ident_start(text[i])) {
            ++i;
            continue;
        }
        if (i > 0 && (text[i - 1] == '.' || is_ident_char(text[i - 1]))) {
            while (i < text.size() && is_ident_char(text[i])) ++i;
            continue;
        }
        size_t start = i;
        while (i < text.size() && (is_ident_char(text[i]) || text[i] == '.')) ++i;
        size_t end = i;
        while (end > start && text[end - 1] == '.') --end;
        std::string token = text.substr(start, end - start);
        size_t j = i;
        while (j < text.size() && (text[j] == ' ' || text[j] == '\t')) ++j;
        if (j < text.size() && text[j] == '(' && full_dotted_name(token)) {
            std::string first = token.substr(0, token.find('.'));
            if (!is_keyword(first)) {
                out.push_back({token, line, entity});
            }
        }
    }
}

void parse_import_line(const std::string& trimmed, int line, std::vector<PyImport>& out) {
    if (auto rest = match_head(trimmed, "import")) {
        PyImport imp;
        imp.line = line;
        for (const auto& part : split_csv(*rest)) {
            std::string module = part;
            std::string alias;
            size_t as_pos = part.find(" as ");
            if (as_pos != std::string::npos) {
                module = trim(part.substr(0, as_pos));
                alias = trim(part.substr(as_pos + 4));
            }
            if (full_dotted_name(module)) {
                imp.names.emplace_back(module, alias);
            }
        }
        if (!imp.names.empty()) out.push_back(imp);
        return;
    }
    if (auto rest = match_head(trimmed, "from")) {
        std::string text = *rest;
        size_t import_pos = text.find(" import ");
        if (import_pos == std::string::npos) return;
        std::string module_part = trim(text.substr(0, import_pos));
        std::string names_part = trim(text.substr(import_pos + 8));
        PyImport imp;
        imp.from_form = true;
        imp.line = line;
        size_t dots = 0;
        while (dots < module_part.size() && module_part[dots] == '.') ++dots;
        imp.relative_level = static_cast<int>(dots);
        imp.module = module_part.substr(dots);
        if (!imp.module.empty() && !full_dotted_name(imp.module)) return;
        // strip enclosing parens of multi-line import lists
        if (!names_part.empty() && names_part.front() == '(') {
            names_part = trim(names_part.substr(1));
            if (!names_part.empty() && names_part.back() == ')') {
                names_part = trim(names_part.substr(0, names_part.size() - 1));
            }
        }
        for (const auto& part : split_csv(names_part)) {
            if (part == "*") {
                imp.names.emplace_back("*", "");
                continue;
            }
            std::string name = part;
            std::string alias;
            size_t as_pos = part.find(" as ");
            if (as_pos != std::string::npos) {
                name = trim(part.substr(0, as_pos));
                alias = trim(part.substr(as_pos + 4));
            }
            if (full_dotted_name(name)) {
                imp.names.emplace_back(name, alias);
            }
        }
        if (imp.relative_level > 0 || !imp.module.empty()) out.push_back(imp);
    }
}

struct Scope {
    int indent;
    int entity;  // -1 = module
};

}  // namespace

PyFileParse parse_python_source(const std::string& source) {
    PyFileParse parse;
    auto masked = mask_source(source);
    parse.line_count = static_cast<int>(masked.lines.size());
    if (!masked.ok) {
        parse.ok = false;
        parse.error = masked.error;
        return parse;
    }
    auto logical = assemble_logical_lines(masked.lines);

    std::vector<Scope> stack;
    int last_code_line = 0;
    std::optional<int> pending_decorator;
    int pending_decorator_indent = -1;

    auto innermost = [&]() { return stack.empty() ? -1 : stack.back().entity; };
    auto nearest_class = [&]() {
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
            if (it->entity >= 0 &&
                parse.entities[static_cast<size_t>(it->entity)].kind == PyEntityKind::Class) {
                return it->entity;
            }
        }
        return -1;
    };
    auto close_to_indent = [&](int indent) {
        while (!stack.empty() && indent <= stack[stack.size() - 1].indent) {
            int idx = stack.back().entity;
            if (idx >= 0) {
                auto& ent = parse.entities[static_cast<size_t>(idx)];
                ent.end_line = std::max(ent.start_line, last_code_line);
            }
            stack.pop_back();
        }
    };

    for (const auto& line : logical) {
        std::string trimmed = trim(line.text);
        if (trimmed.empty()) continue;
        close_to_indent(line.indent);

        if (trimmed[0] == '@') {
            if (!pending_decorator || pending_decorator_indent != line.indent) {
                pending_decorator = line.first_line;
                pending_decorator_indent = line.indent;
            }
            extract_calls(trimmed.substr(1), line.first_line, innermost(), parse.calls);
            last_code_line = line.last_line;
            continue;
        }

        int parent = innermost();
        bool parent_is_class =
            parent >= 0 && parse.entities[static_cast<size_t>(parent)].kind == PyEntityKind::Class;

        if (auto rest = match_head(trimmed, "def")) {
            auto name = leading_identifier(*rest);
            if (name) {
                PyEntity ent;
                ent.kind = parent_is_class ? PyEntityKind::Method : PyEntityKind::Function;
                ent.qualified_name =
                    parent < 0 ? *name
                               : parse.entities[static_cast<size_t>(parent)].qualified_name + "." + *name;
                ent.start_line =
                    pending_decorator && pending_decorator_indent == line.indent ? *pending_decorator
                                                                                 : line.first_line;
                ent.end_line = line.last_line;
                ent.parent = parent;
                int idx = static_cast<int>(parse.entities.size());
                parse.entities.push_back(ent);
                stack.push_back({line.indent, idx});
                // calls in the signature (defaults) belong to the new entity
                size_t paren = rest->find('(');
                if (paren != std::string::npos) {
                    extract_calls(rest->substr(paren), line.first_line, idx, parse.calls);
                }
                pending_decorator.reset();
                last_code_line = line.last_line;
                continue;
            }
        }
        if (auto rest = match_head(trimmed, "class")) {
            auto name = leading_identifier(*rest);
            if (name) {
                PyEntity ent;
                ent.kind = PyEntityKind::Class;
                ent.qualified_name =
                    parent < 0 ? *name
                               : parse.entities[static_cast<size_t>(parent)].qualified_name + "." + *name;
                ent.start_line =
                    pending_decorator && pending_decorator_indent == line.indent ? *pending_decorator
                                                                                 : line.first_line;
                ent.end_line = line.last_line;
                ent.parent = parent;
                int idx = static_cast<int>(parse.entities.size());
                parse.entities.push_back(ent);
                // base list between '(' and the matching ')'
                size_t open = rest->find('(');
                if (open != std::string::npos) {
                    size_t close = rest->rfind(')');
                    if (close != std::string::npos && close > open) {
                        for (const auto& part : split_csv(rest->substr(open + 1, close - open - 1))) {
                            if (part.find('=') != std::string::npos) continue;  // metaclass=...
                            if (full_dotted_name(part)) {
                                parse.bases.push_back({part, line.first_line, idx});
                            }
                        }
                    }
                }
                stack.push_back({line.indent, idx});
                pending_decorator.reset();
                last_code_line = line.last_line;
                continue;
            }
        }
        pending_decorator.reset();

        if (trimmed.rfind("import", 0) == 0 || trimmed.rfind("from", 0) == 0) {
            parse_import_line(trimmed, line.first_line, parse.imports);
        }

        // class attribute construction / annotation => composition site
        int owner_class = -1;
        std::string assign_text = trimmed;
        if (parent_is_class) {
            owner_class = parent;
        } else if (trimmed.rfind("self.", 0) == 0) {
            owner_class = nearest_class();
            assign_text = trimmed.substr(5);
        }
        if (owner_class >= 0) {
            size_t after_name = 0;
            if (auto attr = leading_identifier(assign_text, &after_name)) {
                std::string tail = trim(assign_text.substr(after_name));
                std::string annotation;
                if (!tail.empty() && tail[0] == ':') {
                    size_t eq = tail.find('=');
                    annotation = trim(tail.substr(1, eq == std::string::npos ? std::string::npos
                                                                             : eq - 1));
                    tail = eq == std::string::npos ? "" : trim(tail.substr(eq));
                }
                if (!tail.empty() && tail[0] == '=' && (tail.size() < 2 || tail[1] != '=')) {
                    std::string rhs = trim(tail.substr(1));
                    size_t end = 0;
                    if (auto ctor = leading_dotted(rhs, &end)) {
                        size_t j = end;
                        while (j < rhs.size() && rhs[j] == ' ') ++j;
                        if (j < rhs.size() && rhs[j] == '(') {
                            parse.composes.push_back({*ctor, owner_class, line.first_line});
                        }
                    }
                } else if (tail.empty() && !annotation.empty()) {
                    size_t end = 0;
                    if (auto type_name = leading_dotted(annotation, &end)) {
                        if (trim(annotation.substr(end)).empty() || annotation[end] == '[') {
                            parse.composes.push_back({*type_name, owner_class, line.first_line});
                        }
                    }
                }
            }
        }

        extract_calls(line.text, line.first_line, innermost(), parse.calls);
        last_code_line = line.last_line;
    }
    close_to_indent(0);

    // Merge duplicate definitions (decorator variants sharing one name).
    std::map<std::pair<std::string, int>, int> canonical;
    std::vector<int> remap(parse.entities.size());
    std::vector<PyEntity> merged;
    for (size_t i = 0; i < parse.entities.size(); ++i) {
        auto& ent = parse.entities[i];
        auto key = std::make_pair(ent.qualified_name, static_cast<int>(ent.kind));
        auto it = canonical.find(key);
        if (it == canonical.end()) {
            int idx = static_cast<int>(merged.size());
            canonical[key] = idx;
            remap[i] = idx;
            merged.push_back(ent);
        } else {
            auto& kept = merged[static_cast<size_t>(it->second)];
            kept.start_line = std::min(kept.start_line, ent.start_line);
            kept.end_line = std::max(kept.end_line, ent.end_line);
            remap[i] = it->second;
        }
    }
    for (auto& ent : merged) {
        if (ent.parent >= 0) ent.parent = remap[static_cast<size_t>(ent.parent)];
    }
    for (auto& ref : parse.calls) {
        if (ref.entity >= 0) ref.entity = remap[static_cast<size_t>(ref.entity)];
    }
    for (auto& ref : parse.bases) {
        if (ref.entity >= 0) ref.entity = remap[static_cast<size_t>(ref.entity)];
    }
    for (auto& site : parse.composes) {
        if (site.class_entity >= 0) site.class_entity = remap[static_cast<size_t>(site.class_entity)];
    }
    parse.entities = std::move(merged);
    return parse;
}

}  // namespace rpg
