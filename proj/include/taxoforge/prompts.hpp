#pragma once

#include <map>
#include <string>
#include <vector>

namespace taxoforge {

// Named prompt templates with {slot} placeholders. Shipped defaults are
// embedded; a directory of <name>.txt files can override them. Files may
// start with a "version: N" line, which is stripped before rendering.
class PromptLibrary {
public:
    static constexpr int kVersion = 1;

    // Template names.
    static constexpr const char* kAspectsFirstLevel = "aspects_first_level";
    static constexpr const char* kAspectsOtherLevel = "aspects_other_level";
    static constexpr const char* kSummary = "summary";
    static constexpr const char* kFacet = "facet";
    static constexpr const char* kFixedAspects = "fixed_aspects";

    PromptLibrary();

    // Replaces embedded defaults with any <name>.txt found under dir.
    void load_overrides(const std::string& dir);

    const std::string& raw(const std::string& name) const;

    // Supported slots: {topic} {trace} {papers} {aspect} {paper} {subset}
    // {level} {max_aspects}. Throws on a placeholder with no value.
    std::string render(const std::string& name,
                       const std::map<std::string, std::string>& slots) const;

private:
    std::map<std::string, std::string> templates_;
};

} // namespace taxoforge
