#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "poetrat/gateway.hpp"
#include "poetrat/metrics.hpp"
#include "poetrat/pipeline.hpp"
#include "poetrat/prompts.hpp"

namespace poetrat {

/// Effective settings after merging flags > environment > config file.
/// The whole struct is snapshotted into every run record so a run can
/// be reproduced from its own output.
struct CliConfig {
    std::string model = "gpt-3.5-turbo";
    std::string judge_model;  // empty: use `model`
    uint64_t seed = 0;
    double temperature = 0.0;
    double retrieval_threshold = 0.2;
    int max_parallel = 4;
    std::string cache_dir;    // empty: no response cache
    std::string mock_script;  // empty: live endpoint
    std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
    std::string prompts_dir = "prompts";
    bool resume = false;

    std::string effective_judge_model() const { return judge_model.empty() ? model : judge_model; }
    nlohmann::ordered_json snapshot() const;
};

/// Transport stack per the config: mock script or live endpoint,
/// optionally wrapped in the on-disk cache.
struct GatewayBundle {
    std::shared_ptr<Transport> transport;
    std::shared_ptr<CachingTransport> cache;  // null when uncached
    std::unique_ptr<Gateway> gateway;
};

GatewayBundle make_gateway(const CliConfig& config);

/// One line of runs.jsonl on the write side. `timestamp` and
/// `cache_hits` are the only fields allowed to differ between
/// repeated invocations of the same run.
struct RunRecord {
    std::string run_id;
    std::string method;
    std::string poem_id;
    std::string source;
    std::string output;
    std::optional<RatTrace> trace;
    std::string model;
    uint64_t seed = 0;
    nlohmann::ordered_json config;
    std::string timestamp;
    int64_t cache_hits = 0;
    std::string error;  // empty on success

    nlohmann::ordered_json to_json() const;
};

/// Read-side view of a runs.jsonl line; `raw` preserves every field so
/// downstream commands can re-emit lines without loss.
struct RunView {
    nlohmann::ordered_json raw;
    std::string poem_id;
    std::string source;
    std::string output;
    bool failed = false;
};

std::vector<RunView> load_runs(const std::filesystem::path& path);

std::string now_iso8601_utc();

struct CommandIo {
    std::ostream& out;
    std::ostream& err;
};

struct TranslateArgs {
    std::filesystem::path poems_path;
    std::filesystem::path kb_path;        // rat / single_view
    std::filesystem::path exemplars_path; // five_shot
    std::string method = "rat";
    std::filesystem::path runs_path = "runs.jsonl";
};

struct JudgeArgs {
    std::filesystem::path runs_path;
    std::filesystem::path scored_path = "scored_runs.jsonl";
    std::filesystem::path csv_path;  // optional report copy
};

struct BleuArgs {
    std::filesystem::path runs_path;
    std::filesystem::path poems_path;
    BleuTokenizer tokenizer = BleuTokenizer::Whitespace;
    std::filesystem::path csv_path;
};

struct CorrelateArgs {
    std::filesystem::path scored_runs_path;
    std::filesystem::path annotations_path;
    std::filesystem::path csv_path;
};

struct ProbeArgs {
    std::filesystem::path poems_path;
    std::filesystem::path csv_path;
};

struct AdequacyArgs {
    std::filesystem::path triplets_path;
    std::filesystem::path runs_path;
    std::filesystem::path csv_path;
};

/// Commands return 0 (all items succeeded) or 1 (some items failed);
/// configuration and IO problems throw, which the executable maps to
/// exit code 2.
int cmd_stats(const CliConfig& config, const std::filesystem::path& poems_path, const std::filesystem::path& csv_path,
              CommandIo io);
int cmd_translate(const CliConfig& config, Gateway& gateway, const PromptSet& prompts, const TranslateArgs& args,
                  CommandIo io);
int cmd_judge(const CliConfig& config, Gateway& gateway, const PromptSet& prompts, const JudgeArgs& args,
              CommandIo io);
int cmd_bleu(const CliConfig& config, const BleuArgs& args, CommandIo io);
int cmd_correlate(const CliConfig& config, const CorrelateArgs& args, CommandIo io);
int cmd_probe(const CliConfig& config, Gateway& gateway, const PromptSet& prompts, const ProbeArgs& args,
              CommandIo io);
int cmd_adequacy(const CliConfig& config, Gateway& gateway, const PromptSet& prompts, const AdequacyArgs& args,
                 CommandIo io);

}  // namespace poetrat
