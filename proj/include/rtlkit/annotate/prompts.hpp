#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rtlkit/common/error.hpp"
#include "rtlkit/common/io.hpp"
#include "rtlkit/common/text.hpp"

namespace rtlkit::annotate {

/// Prompt templates loaded from `<dir>/<name>.txt`.
///
/// Placeholders use `{name}`; see `render`. Nothing is hard-coded: a missing
/// template is an error at the point it is first needed.
class PromptLibrary {
public:
    PromptLibrary() = default;

    static PromptLibrary load(const std::filesystem::path& dir) {
        if (!std::filesystem::is_directory(dir))
            fail(ErrorKind::Io, "prompt template directory not found: " + dir.string());
        PromptLibrary lib;
        for (const auto& entry : std::filesystem::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".txt")
                lib.templates_[entry.path().stem().string()] = read_file(entry.path());
        return lib;
    }

    void set(const std::string& name, std::string body) { templates_[name] = std::move(body); }

    bool has(const std::string& name) const { return templates_.count(name) > 0; }

    const std::string& get(const std::string& name) const {
        auto it = templates_.find(name);
        if (it == templates_.end()) fail(ErrorKind::Io, "missing prompt template: " + name);
        return it->second;
    }

    std::string render(const std::string& name, const std::map<std::string, std::string>& values) const {
        return text::render(get(name), values);
    }

    const std::map<std::string, std::string>& all() const { return templates_; }

private:
    std::map<std::string, std::string> templates_;
};

} // namespace rtlkit::annotate
