#pragma once

#include <string>
#include <utility>
#include <vector>

namespace rpg {

// Syntax-level facts lifted from one Python source file by an
// indentation-aware scanner. Strings and comments are masked before any
// pattern is applied, so nothing inside literals is ever mistaken for code.

enum class PyEntityKind { Class, Function, Method };

struct PyEntity {
    PyEntityKind kind = PyEntityKind::Function;
    std::string qualified_name;  // dotted nesting path, e.g. "Scaler.fit"
    int start_line = 0;          // first decorator line when decorated
    int end_line = 0;
    int parent = -1;  // index into PyFileParse::entities, -1 = module level
};

struct PyImport {
    // Plain imports: one (dotted module, alias) pair per imported module;
    // alias empty when not aliased. From-imports: `module` + `names`.
    bool from_form = false;
    int relative_level = 0;  // number of leading dots
    std::string module;      // dotted module ("" for `from . import x`)
    std::vector<std::pair<std::string, std::string>> names;  // (name, alias)
    int line = 0;
};

struct PyReference {
    std::string dotted;  // as written: "check_array", "ops.solve_normal", "self._decision"
    int line = 0;
    int entity = -1;  // enclosing entity index, -1 = module level
};

struct PyComposeSite {
    std::string dotted;  // class-valued right-hand side / annotation
    int class_entity = -1;
    int line = 0;
};

struct PyFileParse {
    bool ok = true;
    std::string error;
    int line_count = 0;
    std::vector<PyEntity> entities;
    std::vector<PyImport> imports;
    std::vector<PyReference> calls;
    std::vector<PyReference> bases;  // entity = subclass index
    std::vector<PyComposeSite> composes;
};

PyFileParse parse_python_source(const std::string& source);

}  // namespace rpg
