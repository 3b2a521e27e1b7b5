#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace poetrat {

/// Replaces each {name} occurrence with slots.at(name). Every slot in
/// the template must be provided and every provided slot must be used;
/// drift between templates and call sites fails loudly.
std::string fill_template(const std::string& tmpl, const std::map<std::string, std::string>& slots);

/// The prompt text assets. Loaded from a directory of *.txt files; a
/// single trailing newline per file is not part of the template.
struct PromptSet {
    std::string selector;
    std::string translator;
    std::string voter;
    std::string extractor;
    std::string zero_shot;
    std::string five_shot;
    std::string rerank_select;
    std::string judge_bs;
    std::string judge_bf;
    std::string judge_bm;
    std::string adequacy;
    std::string probe_source;
    std::string probe_target;

    static PromptSet load(const std::filesystem::path& dir);
};

}  // namespace poetrat
