#include "poetrat/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "poetrat/corpus.hpp"
#include "poetrat/error.hpp"
#include "poetrat/jsonl.hpp"
#include "poetrat/report.hpp"
#include "poetrat/text.hpp"

#if __has_include(<boost/math/distributions/students_t.hpp>)
#include <boost/math/distributions/students_t.hpp>
#define POETRAT_HAVE_BOOST_MATH 1
#endif

namespace poetrat {

using ordered_json = nlohmann::ordered_json;

nlohmann::ordered_json CliConfig::snapshot() const {
    ordered_json j;
    j["model"] = model;
    j["judge_model"] = effective_judge_model();
    j["seed"] = seed;
    j["temperature"] = temperature;
    j["retrieval_threshold"] = retrieval_threshold;
    j["max_parallel"] = max_parallel;
    j["cached"] = !cache_dir.empty();
    j["mock"] = !mock_script.empty();
    return j;
}

GatewayBundle make_gateway(const CliConfig& config) {
    GatewayBundle bundle;
    if (!config.mock_script.empty()) {
        bundle.transport = std::make_shared<MockTransport>(load_mock_script(config.mock_script));
    } else {
#ifdef POETRAT_WITH_HTTP
        HttpConfig http;
        http.endpoint_url = config.endpoint_url;
        bundle.transport = std::make_shared<HttpTransport>(http);
#else
        throw Error(Errc::ConfigError, "built without HTTP support; pass --mock <script>");
#endif
    }
    std::shared_ptr<Transport> top = bundle.transport;
    if (!config.cache_dir.empty()) {
        bundle.cache = std::make_shared<CachingTransport>(top, config.cache_dir);
        top = bundle.cache;
    }
    GatewayConfig gc;
    gc.max_parallel = config.max_parallel;
    bundle.gateway = std::make_unique<Gateway>(top, gc);
    return bundle;
}

std::string now_iso8601_utc() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace {

ordered_json trace_to_json(const RatTrace& trace) {
    ordered_json j;
    j["retrieval"] = {{"entry_poem_id", trace.retrieval.entry_poem_id},
                      {"score", trace.retrieval.score},
                      {"exact", trace.retrieval.exact}};
    ordered_json sel = ordered_json::object();
    for (const auto& [kind, text] : trace.selector_outputs) sel[view_kind_name(kind)] = text;
    j["selector_outputs"] = sel;
    ordered_json cands = ordered_json::array();
    for (const auto& c : trace.candidates) {
        cands.push_back({{"view", view_kind_name(c.view_kind)}, {"text", c.text}});
    }
    j["candidates"] = cands;
    j["voter_raw"] = trace.voter_raw;
    j["final"] = trace.final;
    j["call_count"] = trace.call_count;
    j["warnings"] = trace.warnings;
    return j;
}

ordered_json scorecard_to_json(const ScoreCard& card) {
    ordered_json j;
    auto one = [](const JudgeScore& s) {
        return ordered_json{{"value", s.value}, {"raw_reply", s.raw_reply}};
    };
    j["bm"] = one(card.bm);
    j["bs"] = one(card.bs);
    j["bf"] = one(card.bf);
    j["avg"] = card.avg;
    return j;
}

/// Stable identity for one unit of work; reruns of the same work under
/// the same settings reuse it, which keeps output files comparable.
std::string make_run_id(const std::string& method, const std::string& poem_id, const CliConfig& config) {
    std::string material = method;
    material += '\x1f';
    material += poem_id;
    material += '\x1f';
    material += config.model;
    material += '\x1f';
    material += std::to_string(config.seed);
    material += '\x1f';
    material += config.snapshot().dump();
    return sha256_hex(material).substr(0, 16);
}

std::ofstream open_append(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    return out;
}

void print_report(const Table& table, const std::filesystem::path& csv_path, CommandIo io) {
    io.out << to_text(table) << "\n" << to_csv(table);
    if (!csv_path.empty()) write_csv(table, csv_path);
}

/// Runs `fn(i)` for i in [0, n) on worker threads, at most `width` in
/// flight, results collected in index order.
template <typename Fn>
auto run_indexed(size_t n, int width, Fn fn) {
    using Result = decltype(fn(size_t{0}));
    std::vector<Result> results(n);
    size_t chunk = std::max<size_t>(static_cast<size_t>(std::max(width, 1)) * 4, 8);
    for (size_t base = 0; base < n; base += chunk) {
        size_t end = std::min(n, base + chunk);
        std::vector<std::future<Result>> futures;
        futures.reserve(end - base);
        for (size_t i = base; i < end; ++i) {
            futures.push_back(std::async(std::launch::async, [&fn, i] { return fn(i); }));
        }
        for (size_t i = base; i < end; ++i) results[i] = futures[i - base].get();
    }
    return results;
}

std::string describe(const Error& err) { return std::string(errc_name(err.code())) + ": " + err.what(); }

}  // namespace

ordered_json RunRecord::to_json() const {
    ordered_json j;
    j["run_id"] = run_id;
    j["method"] = method;
    j["poem_id"] = poem_id;
    j["model"] = model;
    j["seed"] = seed;
    j["timestamp"] = timestamp;
    j["cache_hits"] = cache_hits;
    j["source"] = source;
    j["output"] = output;
    if (trace) j["trace"] = trace_to_json(*trace);
    if (!error.empty()) j["error"] = error;
    j["config"] = config;
    return j;
}

std::vector<RunView> load_runs(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open " + path.string());
    std::vector<RunView> views;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        ordered_json raw;
        try {
            raw = ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(Errc::MalformedRecord, path.string() + " line " + std::to_string(line_no) + ": " + e.what());
        }
        RunView v;
        for (const char* key : {"poem_id", "source", "output"}) {
            if (!raw.contains(key) || !raw[key].is_string()) {
                throw Error(Errc::MalformedRecord, path.string() + " line " + std::to_string(line_no) +
                                                       ": missing string field \"" + key + "\"");
            }
        }
        v.poem_id = raw["poem_id"].get<std::string>();
        v.source = raw["source"].get<std::string>();
        v.output = raw["output"].get<std::string>();
        v.failed = raw.contains("error") && raw["error"].is_string() && !raw["error"].get<std::string>().empty();
        v.raw = std::move(raw);
        views.push_back(std::move(v));
    }
    return views;
}

int cmd_stats(const CliConfig&, const std::filesystem::path& poems_path, const std::filesystem::path& csv_path,
              CommandIo io) {
    std::vector<Poem> poems = load_poems(poems_path);
    CorpusStats stats = compute_stats(poems);

    Table table;
    table.title = "Corpus statistics";
    table.columns = {"dynasty", "poems", "src_tokens", "tgt_tokens", "uniq_src", "uniq_tgt",
                     "avg_src_per_line", "avg_tgt_per_line"};
    auto row = [&](const std::string& name, const StatsRow& r) {
        table.add_row({name, std::to_string(r.poem_count), std::to_string(r.total_tokens_src),
                       std::to_string(r.total_tokens_tgt), std::to_string(r.unique_tokens_src),
                       std::to_string(r.unique_tokens_tgt), format_fixed(r.avg_tokens_per_sentence_src, 1),
                       format_fixed(r.avg_tokens_per_sentence_tgt, 1)});
    };
    for (const auto& [dynasty, stats_row] : stats.by_dynasty) row(dynasty_name(dynasty), stats_row);
    row("Total", stats.total);
    print_report(table, csv_path, io);
    return 0;
}

namespace {

struct MethodSpec {
    std::string name;
    bool needs_kb = false;
    bool needs_exemplars = false;
    std::optional<ViewKind> single_view;
    bool is_rat = false;
    bool is_rerank = false;
    bool is_five_shot = false;
    bool is_zero_shot = false;
};

MethodSpec parse_method(const std::string& method) {
    MethodSpec spec;
    spec.name = method;
    if (method == "rat") {
        spec.needs_kb = spec.is_rat = true;
    } else if (method == "zero_shot") {
        spec.is_zero_shot = true;
    } else if (method == "five_shot") {
        spec.needs_exemplars = spec.is_five_shot = true;
    } else if (method == "rerank") {
        spec.is_rerank = true;
    } else if (method.rfind("single_view:", 0) == 0) {
        spec.needs_kb = true;
        spec.single_view = parse_view_kind(method.substr(std::string("single_view:").size()));
    } else {
        throw Error(Errc::ConfigError, "unknown method \"" + method +
                                           "\" (expected rat, zero_shot, five_shot, rerank, single_view:<kind>)");
    }
    return spec;
}

}  // namespace

int cmd_translate(const CliConfig& config, Gateway& gateway, const PromptSet& prompts, const TranslateArgs& args,
                  CommandIo io) {
    MethodSpec spec = parse_method(args.method);
    std::vector<Poem> poems = load_poems(args.poems_path);

    KnowledgeBase kb;
    if (spec.needs_kb) {
        if (args.kb_path.empty()) {
            throw Error(Errc::ConfigError, "method " + spec.name + " needs --kb <knowledge.jsonl>");
        }
        KnowledgeLoadResult loaded = load_knowledge_entries(args.kb_path);
        if (loaded.missing_field_warnings > 0) {
            io.err << "warning: " << loaded.missing_field_warnings << " missing knowledge fields defaulted to empty\n";
        }
        kb = KnowledgeBase::build(std::move(loaded.entries));
    }

    std::vector<FewShotExemplar> exemplars;
    if (spec.needs_exemplars) {
        if (args.exemplars_path.empty()) {
            throw Error(Errc::ConfigError, "method five_shot needs --exemplars <fiveshot.jsonl>");
        }
        exemplars = load_exemplars(args.exemplars_path);
    }

    std::unordered_set<std::string> already_done;
    if (config.resume && std::filesystem::exists(args.runs_path)) {
        for (const RunView& v : load_runs(args.runs_path)) already_done.insert(v.poem_id);
    }

    std::vector<const Poem*> todo;
    for (const Poem& poem : poems) {
        if (!already_done.count(poem.id)) todo.push_back(&poem);
    }

    const ordered_json config_snapshot = config.snapshot();
    auto records = run_indexed(todo.size(), config.max_parallel, [&](size_t i) {
        const Poem& poem = *todo[i];
        RunRecord record;
        record.run_id = make_run_id(spec.name, poem.id, config);
        record.method = spec.name;
        record.poem_id = poem.id;
        record.model = config.model;
        record.seed = config.seed;
        record.config = config_snapshot;
        record.source = poem.source_text();

        RunContext ctx(gateway, prompts, config.model);
        ctx.temperature = config.temperature;
        ctx.retrieval_threshold = config.retrieval_threshold;
        try {
            if (spec.is_rat) {
                RatResult result = run_rat(ctx, poem, kb);
                record.output = result.final;
                record.trace = std::move(result.trace);
            } else if (spec.single_view) {
                record.output = run_single_view(ctx, poem, kb, *spec.single_view);
            } else if (spec.is_zero_shot) {
                record.output = run_zero_shot(ctx, poem);
            } else if (spec.is_five_shot) {
                record.output = run_five_shot(ctx, poem, exemplars);
            } else {
                record.output = run_rerank(ctx, poem, config.effective_judge_model());
            }
        } catch (const Error& err) {
            record.error = describe(err);
        }
        record.cache_hits = ctx.cache_hits.load();
        return record;
    });

    std::ofstream out = open_append(args.runs_path);
    int failures = 0;
    for (RunRecord& record : records) {
        record.timestamp = now_iso8601_utc();
        if (!record.error.empty()) {
            ++failures;
            io.err << "poem " << record.poem_id << " failed: " << record.error << "\n";
        }
        out << record.to_json().dump() << "\n";
    }
    out.flush();
    if (!out) throw Error(Errc::Io, "write failed for " + args.runs_path.string());

    io.out << "method " << spec.name << ": " << records.size() << " poems (" << already_done.size() << " skipped, "
           << failures << " failed) -> " << args.runs_path.string() << "\n";
    return failures > 0 ? 1 : 0;
}

int cmd_judge(const CliConfig& config, Gateway& gateway, const PromptSet& prompts, const JudgeArgs& args,
              CommandIo io) {
    std::vector<RunView> runs = load_runs(args.runs_path);

    JudgeOptions options;
    options.model = config.effective_judge_model();
    options.temperature = 0.0;

    struct Outcome {
        std::optional<ScoreCard> card;
        std::string error;
    };
    auto outcomes = run_indexed(runs.size(), config.max_parallel, [&](size_t i) {
        Outcome outcome;
        if (runs[i].failed) {
            outcome.error = "skipped: translation failed";
            return outcome;
        }
        try {
            outcome.card = score_card(gateway, prompts, options, runs[i].source, runs[i].output);
        } catch (const Error& err) {
            outcome.error = describe(err);
        }
        return outcome;
    });

    std::ofstream out(args.scored_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + args.scored_path.string());
    double sum_bm = 0, sum_bs = 0, sum_bf = 0, sum_avg = 0;
    int scored = 0, excluded = 0;
    for (size_t i = 0; i < runs.size(); ++i) {
        ordered_json line = runs[i].raw;
        if (outcomes[i].card) {
            const ScoreCard& card = *outcomes[i].card;
            line["scorecard"] = scorecard_to_json(card);
            sum_bm += card.bm.value;
            sum_bs += card.bs.value;
            sum_bf += card.bf.value;
            sum_avg += card.avg;
            ++scored;
        } else {
            line["judge_error"] = outcomes[i].error;
            ++excluded;
            io.err << "item " << runs[i].poem_id << " excluded: " << outcomes[i].error << "\n";
        }
        out << line.dump() << "\n";
    }
    out.flush();
    if (!out) throw Error(Errc::Io, "write failed for " + args.scored_path.string());

    Table table;
    table.title = "Judge corpus means (n=" + std::to_string(scored) + ", excluded=" + std::to_string(excluded) + ")";
    table.columns = {"metric", "mean"};
    if (scored > 0) {
        table.add_row({"BM", format_fixed(sum_bm / scored, 1)});
        table.add_row({"BS", format_fixed(sum_bs / scored, 1)});
        table.add_row({"BF", format_fixed(sum_bf / scored, 1)});
        table.add_row({"Avg", format_fixed(sum_avg / scored, 1)});
    }
    print_report(table, args.csv_path, io);
    return excluded > 0 ? 1 : 0;
}

int cmd_bleu(const CliConfig&, const BleuArgs& args, CommandIo io) {
    std::vector<RunView> runs = load_runs(args.runs_path);
    std::vector<Poem> poems = load_poems(args.poems_path);
    std::unordered_map<std::string, const Poem*> by_id;
    for (const Poem& poem : poems) by_id[poem.id] = &poem;

    std::vector<std::string> candidates;
    std::vector<std::string> references;
    int excluded = 0, failed = 0;
    for (const RunView& run : runs) {
        if (run.failed) {
            ++failed;
            ++excluded;
            continue;
        }
        auto it = by_id.find(run.poem_id);
        if (it == by_id.end() || it->second->reference_lines.empty()) {
            ++excluded;
            io.err << "item " << run.poem_id << " excluded: no reference\n";
            continue;
        }
        candidates.push_back(run.output);
        references.push_back(it->second->reference_text());
    }

    BleuReport report = corpus_bleu(candidates, references, args.tokenizer);
    Table table;
    table.title = "Corpus BLEU (n=" + std::to_string(candidates.size()) + ", excluded=" + std::to_string(excluded) +
                  ", tokenizer=" + (args.tokenizer == BleuTokenizer::Whitespace ? "whitespace" : "character") + ")";
    table.columns = {"bleu_1", "bleu_2", "bleu_3", "bleu_4", "brevity_penalty", "candidate_len", "reference_len"};
    table.add_row({format_fixed(report.bleu[0], 1), format_fixed(report.bleu[1], 1), format_fixed(report.bleu[2], 1),
                   format_fixed(report.bleu[3], 1), format_fixed(report.brevity_penalty, 3),
                   std::to_string(report.candidate_len), std::to_string(report.reference_len)});
    print_report(table, args.csv_path, io);
    return failed > 0 ? 1 : 0;
}

namespace {

struct PairedT {
    double t = 0.0;
    double p = std::numeric_limits<double>::quiet_NaN();
    bool valid = false;
};

PairedT paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    PairedT result;
    size_t n = a.size();
    if (n < 2) return result;
    double mean = 0;
    for (size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double ss = 0;
    for (size_t i = 0; i < n; ++i) {
        double d = a[i] - b[i] - mean;
        ss += d * d;
    }
    double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) return result;
    result.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    result.valid = true;
#ifdef POETRAT_HAVE_BOOST_MATH
    boost::math::students_t dist(static_cast<double>(n - 1));
    result.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(result.t)));
#endif
    return result;
}

std::string corr_cell(double (*fn)(const std::vector<double>&, const std::vector<double>&),
                      const std::vector<double>& xs, const std::vector<double>& ys) {
    try {
        return format_fixed(fn(xs, ys), 3);
    } catch (const Error& err) {
        if (err.code() == Errc::DegenerateInput) return "nan";
        throw;
    }
}

}  // namespace

int cmd_correlate(const CliConfig&, const CorrelateArgs& args, CommandIo io) {
    std::vector<RunView> runs = load_runs(args.scored_runs_path);

    struct Annotation {
        int bm = 0, bs = 0, bf = 0;
    };
    std::unordered_map<std::string, Annotation> annotations;
    jsonl::for_each_record(args.annotations_path, [&](const nlohmann::json& record, int line_no) {
        auto require_score = [&](const char* key) {
            if (!record.contains(key) || !record[key].is_number_integer()) {
                throw Error(Errc::MalformedRecord,
                            "annotations line " + std::to_string(line_no) + ": missing integer \"" + key + "\"");
            }
            int value = record[key].get<int>();
            if (value < 1 || value > 5) {
                throw Error(Errc::MalformedRecord, "annotations line " + std::to_string(line_no) + ": " + key + "=" +
                                                       std::to_string(value) + " outside 1..5");
            }
            return value;
        };
        if (!record.contains("item_id") || !record["item_id"].is_string()) {
            throw Error(Errc::MalformedRecord, "annotations line " + std::to_string(line_no) + ": missing item_id");
        }
        std::string id = record["item_id"].get<std::string>();
        Annotation ann{require_score("human_bm"), require_score("human_bs"), require_score("human_bf")};
        if (!annotations.emplace(std::move(id), ann).second) {
            throw Error(Errc::DuplicateId, "annotations line " + std::to_string(line_no) + ": duplicate item_id");
        }
    });

    std::vector<double> model_bm, model_bs, model_bf, model_avg;
    std::vector<double> human_bm, human_bs, human_bf, human_avg;
    int unmatched_runs = 0, unscored_runs = 0;
    std::unordered_set<std::string> matched_ids;
    for (const RunView& run : runs) {
        if (!run.raw.contains("scorecard")) {
            ++unscored_runs;
            continue;
        }
        auto it = annotations.find(run.poem_id);
        if (it == annotations.end()) {
            ++unmatched_runs;
            io.err << "run " << run.poem_id << " has no annotation\n";
            continue;
        }
        const auto& card = run.raw["scorecard"];
        model_bm.push_back(card["bm"]["value"].get<double>());
        model_bs.push_back(card["bs"]["value"].get<double>());
        model_bf.push_back(card["bf"]["value"].get<double>());
        model_avg.push_back(card["avg"].get<double>());
        human_bm.push_back(it->second.bm);
        human_bs.push_back(it->second.bs);
        human_bf.push_back(it->second.bf);
        human_avg.push_back(scorecard_avg(it->second.bm, it->second.bs, it->second.bf));
        matched_ids.insert(run.poem_id);
    }
    int unmatched_annotations = 0;
    for (const auto& [id, ann] : annotations) {
        (void)ann;
        if (!matched_ids.count(id)) ++unmatched_annotations;
    }

    size_t n = model_bm.size();
    if (n < 2) {
        throw Error(Errc::DegenerateInput, "only " + std::to_string(n) + " matched items; need at least 2");
    }

    Table table;
    table.title = "Correlation vs human annotations (n=" + std::to_string(n) +
                  ", unmatched_runs=" + std::to_string(unmatched_runs + unscored_runs) +
                  ", unmatched_annotations=" + std::to_string(unmatched_annotations) + ")";
    table.columns = {"metric", "pearson_r", "spearman_rho", "kendall_tau", "paired_t", "p_value"};
    auto add = [&](const std::string& name, const std::vector<double>& model, const std::vector<double>& human) {
        PairedT tt = paired_t_test(model, human);
        table.add_row({name, corr_cell(pearson, model, human), corr_cell(spearman, model, human),
                       corr_cell(kendall, model, human), tt.valid ? format_fixed(tt.t, 3) : "nan",
                       (tt.valid && !std::isnan(tt.p)) ? format_fixed(tt.p, 4) : "nan"});
    };
    add("BM", model_bm, human_bm);
    add("BS", model_bs, human_bs);
    add("BF", model_bf, human_bf);
    add("Avg", model_avg, human_avg);
    print_report(table, args.csv_path, io);
    return 0;
}

int cmd_probe(const CliConfig& config, Gateway& gateway, const PromptSet& prompts, const ProbeArgs& args,
              CommandIo io) {
    std::vector<Poem> poems = load_poems(args.poems_path);

    struct Job {
        const Poem* poem;
        ProbeLanguage language;
        std::string reference;
    };
    std::vector<Job> jobs;
    int excluded = 0;
    for (const Poem& poem : poems) {
        if (poem.dynasty == Dynasty::Other) {
            ++excluded;
            io.err << "poem " << poem.id << " excluded: dynasty outside Tang/Song/Yuan\n";
            continue;
        }
        jobs.push_back({&poem, ProbeLanguage::Source, poem.source_text()});
        if (!poem.reference_lines.empty()) {
            jobs.push_back({&poem, ProbeLanguage::Target, poem.reference_text()});
        } else {
            ++excluded;
            io.err << "poem " << poem.id << " target probe excluded: no reference\n";
        }
    }

    struct Outcome {
        double bleu4 = 0.0;
        std::string error;
    };
    auto outcomes = run_indexed(jobs.size(), config.max_parallel, [&](size_t i) {
        Outcome outcome;
        RunContext ctx(gateway, prompts, config.model);
        try {
            ProbeResult result =
                contamination_probe(ctx, jobs[i].poem->title, jobs[i].poem->author, jobs[i].language, jobs[i].reference);
            outcome.bleu4 = result.bleu.bleu[3];
        } catch (const Error& err) {
            outcome.error = describe(err);
        }
        return outcome;
    });

    std::map<std::pair<Dynasty, ProbeLanguage>, std::vector<double>> cells;
    int failures = 0;
    for (size_t i = 0; i < jobs.size(); ++i) {
        if (!outcomes[i].error.empty()) {
            ++failures;
            io.err << "poem " << jobs[i].poem->id << " probe failed: " << outcomes[i].error << "\n";
            continue;
        }
        cells[{jobs[i].poem->dynasty, jobs[i].language}].push_back(outcomes[i].bleu4);
    }

    Table table;
    table.title = "Contamination probe: mean BLEU-4 of generated vs reference (excluded=" + std::to_string(excluded) +
                  ", failed=" + std::to_string(failures) + ")";
    table.columns = {"model"};
    for (Dynasty dynasty : {Dynasty::Tang, Dynasty::Song, Dynasty::Yuan}) {
        table.columns.push_back(std::string(dynasty_name(dynasty)) + "-Chinese");
        table.columns.push_back(std::string(dynasty_name(dynasty)) + "-English");
    }
    std::vector<std::string> row = {config.model};
    for (Dynasty dynasty : {Dynasty::Tang, Dynasty::Song, Dynasty::Yuan}) {
        for (ProbeLanguage language : {ProbeLanguage::Source, ProbeLanguage::Target}) {
            auto it = cells.find({dynasty, language});
            if (it == cells.end() || it->second.empty()) {
                row.push_back("n/a");
                continue;
            }
            double sum = 0;
            for (double v : it->second) sum += v;
            row.push_back(format_fixed(sum / static_cast<double>(it->second.size()), 1));
        }
    }
    table.add_row(std::move(row));
    print_report(table, args.csv_path, io);
    return failures > 0 ? 1 : 0;
}

int cmd_adequacy(const CliConfig& config, Gateway& gateway, const PromptSet& prompts, const AdequacyArgs& args,
                 CommandIo io) {
    std::vector<AdequacyTriplet> triplets = load_triplets(args.triplets_path);
    std::vector<RunView> runs = load_runs(args.runs_path);
    std::unordered_map<std::string, const AdequacyTriplet*> by_id;
    for (const AdequacyTriplet& triplet : triplets) by_id[triplet.id] = &triplet;

    struct Job {
        const AdequacyTriplet* triplet;
        const RunView* run;
    };
    std::vector<Job> jobs;
    int unmatched = 0;
    for (const RunView& run : runs) {
        if (run.failed) {
            ++unmatched;
            continue;
        }
        auto it = by_id.find(run.poem_id);
        if (it == by_id.end()) {
            ++unmatched;
            io.err << "run " << run.poem_id << " has no adequacy triplet\n";
            continue;
        }
        jobs.push_back({it->second, &run});
    }

    JudgeOptions options;
    options.model = config.effective_judge_model();
    options.temperature = 0.0;

    struct Outcome {
        int verdict = -1;
        std::string error;
    };
    auto outcomes = run_indexed(jobs.size(), config.max_parallel, [&](size_t i) {
        Outcome outcome;
        try {
            outcome.verdict = adequacy_judge(gateway, prompts, options, *jobs[i].triplet, jobs[i].run->output,
                                             config.seed);
        } catch (const Error& err) {
            outcome.error = describe(err);
        }
        return outcome;
    });

    std::vector<int> verdicts;
    int excluded = 0;
    for (size_t i = 0; i < jobs.size(); ++i) {
        if (outcomes[i].verdict < 0) {
            ++excluded;
            io.err << "item " << jobs[i].triplet->id << " excluded: " << outcomes[i].error << "\n";
            continue;
        }
        verdicts.push_back(outcomes[i].verdict);
    }

    double acc = accuracy(verdicts);
    Table table;
    table.title = "Adequacy (model-derived verdicts)";
    table.columns = {"ACC (auto)", "n", "excluded", "unmatched"};
    table.add_row({format_fixed(acc, 1), std::to_string(verdicts.size()), std::to_string(excluded),
                   std::to_string(unmatched)});
    print_report(table, args.csv_path, io);
    return excluded > 0 ? 1 : 0;
}

}  // namespace poetrat
