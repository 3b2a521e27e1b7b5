#include "poetrat/prompts.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "poetrat/error.hpp"

namespace poetrat {

std::string fill_template(const std::string& tmpl, const std::map<std::string, std::string>& slots) {
    std::string out;
    out.reserve(tmpl.size());
    std::set<std::string> used;
    size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            size_t close = tmpl.find('}', i + 1);
            if (close == std::string::npos) {
                throw Error(Errc::ConfigError, "unterminated slot in template");
            }
            std::string name = tmpl.substr(i + 1, close - i - 1);
            auto it = slots.find(name);
            if (it == slots.end()) {
                throw Error(Errc::ConfigError, "template slot {" + name + "} has no value");
            }
            out += it->second;
            used.insert(name);
            i = close + 1;
        } else {
            out += tmpl[i];
            ++i;
        }
    }
    for (const auto& [name, value] : slots) {
        (void)value;
        if (!used.count(name)) {
            throw Error(Errc::ConfigError, "slot \"" + name + "\" does not appear in template");
        }
    }
    return out;
}

namespace {

std::string read_template(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open prompt file " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string s = buf.str();
    if (!s.empty() && s.back() == '\n') s.pop_back();
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace

PromptSet PromptSet::load(const std::filesystem::path& dir) {
    PromptSet p;
    p.selector = read_template(dir / "selector.txt");
    p.translator = read_template(dir / "translator.txt");
    p.voter = read_template(dir / "voter.txt");
    p.extractor = read_template(dir / "extractor.txt");
    p.zero_shot = read_template(dir / "zero_shot.txt");
    p.five_shot = read_template(dir / "five_shot.txt");
    p.rerank_select = read_template(dir / "rerank_select.txt");
    p.judge_bs = read_template(dir / "judge_bs.txt");
    p.judge_bf = read_template(dir / "judge_bf.txt");
    p.judge_bm = read_template(dir / "judge_bm.txt");
    p.adequacy = read_template(dir / "adequacy.txt");
    p.probe_source = read_template(dir / "probe_source.txt");
    p.probe_target = read_template(dir / "probe_target.txt");
    return p;
}

}  // namespace poetrat
