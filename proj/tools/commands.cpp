#include "commands.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "tricon/consistency.hpp"
#include "tricon/embed_client.hpp"
#include "tricon/error.hpp"
#include "tricon/metrics.hpp"
#include "tricon/record_io.hpp"
#include "tricon/refine.hpp"
#include "tricon/synth/lab.hpp"
#include "tricon/taskgen.hpp"

namespace tricon::cli {
namespace {

constexpr const char* kEmbedUrlEnv = "TRICON_EMBED_URL";
constexpr const char* kModelUrlEnv = "TRICON_MODEL_URL";

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case Errc::IoFailure:
        case Errc::ProviderUnavailable:
        case Errc::ModelError:
            return kIoError;
        default:
            return kValidationError;
    }
}

/// Runs `body`, mapping library errors to exit codes with a stderr line.
template <class Body>
int guarded(const char* command, std::ostream& err, Body&& body) {
    try {
        body();
        return kOk;
    } catch (const Error& e) {
        err << "tricon " << command << ": " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "tricon " << command << ": " << e.what() << '\n';
        return kIoError;
    }
}

/// Writes to the named file, or to `fallback` when the path is empty.
class Sink {
public:
    Sink(const OutputPath& path, std::ostream& fallback) : path_(path), fallback_(fallback) {
        if (!path.empty()) file_ = std::make_unique<std::ofstream>(open_output(path));
    }
    std::ostream& stream() { return file_ ? *file_ : fallback_; }
    void finish() {
        stream().flush();
        if (!stream()) throw Error(Errc::IoFailure, "write failure on " + (path_.empty() ? std::string("stdout") : path_.string()));
    }

private:
    OutputPath path_;
    std::ostream& fallback_;
    std::unique_ptr<std::ofstream> file_;
};

TemplateCatalog catalog_from(const std::filesystem::path& path) {
    return path.empty() ? default_catalog() : load_catalog(path);
}

std::string resolve_url(const std::string& flag, const char* env) {
    if (const char* v = std::getenv(env); v && *v) return v;
    return flag;
}

struct Backend {
    std::unique_ptr<ServiceEmbeddingProvider> provider;
    std::unique_ptr<TextMeasures> measures;
};

Backend make_backend(const BackendOptions& o) {
    Backend b;
    if (o.text_backend == "lexical") {
        b.measures = std::make_unique<LexicalMeasures>();
    } else if (o.text_backend == "service") {
        const auto url = resolve_url(o.service_url, kEmbedUrlEnv);
        if (url.empty()) {
            throw Error(Errc::ConfigError, std::string("service backend needs --service-url or ") + kEmbedUrlEnv);
        }
        b.provider = std::make_unique<ServiceEmbeddingProvider>(url);
        b.measures = std::make_unique<EmbeddingMeasures>(*b.provider);
    } else {
        throw Error(Errc::ConfigError, "unknown text backend '" + o.text_backend + "'");
    }
    return b;
}

TextField parse_field(const std::string& f) {
    if (f == "question") return TextField::Question;
    if (f == "answer") return TextField::Answer;
    if (f == "both") return TextField::Both;
    throw Error(Errc::ConfigError, "--field must be question, answer or both");
}

}  // namespace

int run_transform(const TransformOptions& o, std::ostream& out, std::ostream& err) {
    return guarded("transform", err, [&] {
        const auto ratios = parse_ratios(o.ratios);
        const auto catalog = catalog_from(o.templates);
        const auto seed_dataset = read_triplets(o.input);
        const auto records = build_task_corpus(seed_dataset, ratios, o.seed, catalog);
        Sink sink(o.output, out);
        write_task_records(records, sink.stream());
        sink.finish();
        std::size_t counts[3] = {0, 0, 0};
        for (const auto& r : records) ++counts[static_cast<int>(r.task_kind)];
        err << "transform: " << records.size() << " records (i2qa " << counts[0] << ", iq2a " << counts[1]
            << ", ia2q " << counts[2] << ")\n";
    });
}

int run_score(const ScoreOptions& o, std::ostream& out, std::ostream& err) {
    return guarded("score", err, [&] {
        if (o.workers < 1) throw Error(Errc::ConfigError, "--workers must be >= 1");
        const auto catalog = catalog_from(o.templates);
        auto backend = make_backend(o.backend);
        const auto set = read_reconstructed(o.input);
        const auto scored = score_all(set.triplets, set.reconstructions, *backend.measures, o.workers, catalog);
        Sink sink(o.output, out);
        write_scored(scored, sink.stream());
        sink.finish();
        std::size_t flagged = 0;
        for (const auto& s : scored) flagged += s.flagged ? 1 : 0;
        err << "score: " << scored.size() << " records scored with the " << backend.measures->name()
            << " backend, " << flagged << " flagged\n";
    });
}

int run_filter(const FilterOptions& o, std::ostream& out, std::ostream& err) {
    return guarded("filter", err, [&] {
        if (!(o.top > 0.0 && o.top <= 1.0)) throw Error(Errc::ConfigError, "--top must lie in (0, 1]");
        const auto catalog = catalog_from(o.templates);
        const auto scored = read_scored(o.input);
        const auto result = o.exact ? filter_exact(scored, catalog) : filter_top(scored, o.top, o.per_type);
        Sink sink(o.output, out);
        write_scored(result.retained, sink.stream());
        sink.finish();
        if (!o.excluded.empty()) write_scored(result.excluded, o.excluded);
        err << "filter: retained " << result.retained.size() << " of " << scored.size() << '\n';
    });
}

int run_stats(const StatsOptions& o, std::ostream& out, std::ostream& err) {
    return guarded("stats", err, [&] {
        const auto field = parse_field(o.field);
        const auto triplets = read_triplets(o.input);
        const auto report = diversity_report(triplets, field);
        Sink sink(o.output, out);
        sink.stream() << to_json(report) << '\n';
        sink.finish();
    });
}

int run_synth(const SynthOptions& o, std::ostream& out, std::ostream& err) {
    return guarded("synth run", err, [&] {
        synth::validate(o.config);
        const auto history = synth::self_refine(o.config);
        Sink sink(o.output, out);
        for (std::size_t k = 0; k < history.size(); ++k) sink.stream() << synth::to_json(k, history[k]) << '\n';
        sink.finish();
    });
}

int run_loop(const LoopOptions& o, std::ostream& out, std::ostream& err) {
    return guarded("loop", err, [&] {
        LoopConfig config;
        config.rounds = o.rounds;
        config.filter_fraction = o.top;
        config.per_type = o.per_type;
        config.exact = o.exact;
        config.seed = o.seed;
        config.unlabeled_manifests = o.manifests;
        config.seed_dataset = o.seed_dataset;
        config.workers = o.workers;
        config.out_dir = o.out_dir;
        validate(config);

        const auto model_url = resolve_url(o.model_url, kModelUrlEnv);
        if (o.model_table.empty() == model_url.empty()) {
            throw Error(Errc::ConfigError, "give exactly one of --model-table or --model-url");
        }
        std::shared_ptr<const TableModel> table;
        if (!o.model_table.empty()) table = std::make_shared<const TableModel>(TableModel::load(o.model_table));
        const ModelFactory factory = [&](std::size_t) -> std::unique_ptr<ModelInterface> {
            if (table) return std::make_unique<TableModel>(*table);
            return std::make_unique<HttpModel>(model_url);
        };

        const auto catalog = catalog_from(o.templates);
        auto backend = make_backend(o.backend);
        const auto reports = iterate(factory, config, *backend.measures, catalog);
        for (const auto& r : reports) {
            out << to_json(r) << '\n';
            err << "loop: round " << r.round << " generated " << r.generated << ", retained " << r.retained
                << ", merged " << r.merged << '\n';
        }
        out.flush();
    });
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"tricon: triangular-consistency data curation and the synthetic self-training lab"};
    app.require_subcommand(1);

    TransformOptions transform;
    auto* t = app.add_subcommand("transform", "Render a seed triplet file into multi-task training records");
    t->add_option("--input,-i", transform.input, "Seed triplets (JSONL)")->required();
    t->add_option("--output,-o", transform.output, "Task records (JSONL); stdout when omitted");
    t->add_option("--ratios", transform.ratios, "Mask ratios both,question,answer")->capture_default_str();
    t->add_option("--seed", transform.seed, "RNG seed")->capture_default_str();
    t->add_option("--templates", transform.templates, "Template catalog overriding the built-in one");

    ScoreOptions score;
    auto* s = app.add_subcommand("score", "Score reconstructed triplets by triangular consistency");
    s->add_option("--input,-i", score.input, "Reconstructed triplets (JSONL with q_prime, a_prime)")->required();
    s->add_option("--output,-o", score.output, "Scored records (JSONL); stdout when omitted");
    s->add_option("--text-backend", score.backend.text_backend, "lexical or service")
        ->check(CLI::IsMember({"lexical", "service"}))
        ->capture_default_str();
    s->add_option("--service-url", score.backend.service_url,
                  std::string("Embedding service base URL (overridden by ") + kEmbedUrlEnv + ")");
    s->add_option("--workers", score.workers, "Scoring threads")->capture_default_str();
    s->add_option("--templates", score.templates, "Template catalog overriding the built-in one");

    FilterOptions filter;
    auto* f = app.add_subcommand("filter", "Keep the most consistent fraction of scored records");
    f->add_option("--input,-i", filter.input, "Scored records (JSONL)")->required();
    f->add_option("--output,-o", filter.output, "Retained records (JSONL); stdout when omitted");
    f->add_option("--excluded", filter.excluded, "Also write the excluded records here");
    f->add_option("--top", filter.top, "Fraction to keep, in (0, 1]")->capture_default_str();
    f->add_flag("--per-type,!--global", filter.per_type, "Cut each category separately (default) or globally");
    f->add_flag("--exact", filter.exact, "Keep only exact reconstructions instead of the top fraction");
    f->add_option("--templates", filter.templates, "Template catalog overriding the built-in one");

    StatsOptions stats;
    auto* st = app.add_subcommand("stats", "Diversity report (TTR, Distinct-2, category histogram) as JSON");
    st->add_option("--input,-i", stats.input, "Triplets (JSONL)")->required();
    st->add_option("--output,-o", stats.output, "Report file; stdout when omitted");
    st->add_option("--field", stats.field, "question, answer or both")
        ->check(CLI::IsMember({"question", "answer", "both"}))
        ->capture_default_str();

    SynthOptions synth_opts;
    auto& cfg = synth_opts.config;
    std::filesystem::path synth_config_file;
    std::string nll_reduction = "mean";
    auto* sy = app.add_subcommand("synth", "Synthetic self-training lab");
    sy->require_subcommand(1);
    auto* run = sy->add_subcommand("run", "Baseline plus confidence-gated pseudo-label rounds; one JSON line per round");
    run->add_option("--config", synth_config_file, "JSON file with SynthConfig field names; flags override it");
    run->add_option("--d", cfg.d, "Dimension")->capture_default_str();
    run->add_option("--n-lab", cfg.n_lab, "Labeled pairs")->capture_default_str();
    run->add_option("--n-unl", cfg.n_unl, "Unlabeled observations")->capture_default_str();
    run->add_option("--n-test", cfg.n_test, "Test pairs")->capture_default_str();
    run->add_option("--x-scale", cfg.x_scale, "Laplace scale of X")->capture_default_str();
    run->add_option("--noise-scale", cfg.noise_scale, "Laplace scale of the noise")->capture_default_str();
    run->add_option("--hidden", cfg.hidden, "Hidden layer widths")->delimiter(',')->capture_default_str();
    run->add_option("--lr", cfg.lr, "Adam learning rate")->capture_default_str();
    run->add_option("--batch", cfg.batch, "Minibatch size")->capture_default_str();
    run->add_option("--epochs", cfg.epochs, "Epochs per training run")->capture_default_str();
    run->add_option("--keep-frac", cfg.keep_frac, "Fraction of pseudo-labels kept per round")->capture_default_str();
    run->add_option("--rounds", cfg.rounds, "Self-training rounds")->capture_default_str();
    run->add_option("--seed", cfg.rng_seed, "RNG seed")->capture_default_str();
    run->add_option("--nll-reduction", nll_reduction, "mean (per dimension) or sum (over dimensions)")
        ->check(CLI::IsMember({"mean", "sum"}))
        ->capture_default_str();
    run->add_flag("--relabel", cfg.relabel, "Re-select pseudo-labels from the full pool each round");
    run->add_flag("--warm-start", cfg.warm_start, "Retrain from the previous round's weights");
    run->add_option("--output,-o", synth_opts.output, "Metrics file; stdout when omitted");

    LoopOptions loop;
    auto* l = app.add_subcommand("loop", "Generate, reconstruct, score, filter and merge for one or more rounds");
    l->add_option("--seed-dataset", loop.seed_dataset, "Seed triplets (JSONL)")->required();
    l->add_option("--manifest", loop.manifests, "Unlabeled image list; one per round or one split evenly")->required();
    l->add_option("--rounds", loop.rounds, "Refinement rounds")->capture_default_str();
    l->add_option("--top", loop.top, "Fraction to keep, in (0, 1]")->capture_default_str();
    l->add_flag("--per-type,!--global", loop.per_type, "Cut each category separately (default) or globally");
    l->add_flag("--exact", loop.exact, "Keep only exact reconstructions");
    l->add_option("--model-table", loop.model_table, "Table-backed model (JSON)");
    l->add_option("--model-url", loop.model_url, std::string("Model endpoint base URL (overridden by ") + kModelUrlEnv + ")");
    l->add_option("--text-backend", loop.backend.text_backend, "lexical or service")
        ->check(CLI::IsMember({"lexical", "service"}))
        ->capture_default_str();
    l->add_option("--service-url", loop.backend.service_url, "Embedding service base URL");
    l->add_option("--workers", loop.workers, "Bound on in-flight model requests")->capture_default_str();
    l->add_option("--seed", loop.seed, "RNG seed")->capture_default_str();
    l->add_option("--out-dir", loop.out_dir, "Directory for per-round outputs")->required();
    l->add_option("--templates", loop.templates, "Template catalog overriding the built-in one");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kValidationError;
    }

    if (*t) return run_transform(transform, out, err);
    if (*s) return run_score(score, out, err);
    if (*f) return run_filter(filter, out, err);
    if (*st) return run_stats(stats, out, err);
    if (*run) {
        // Precedence: defaults < --config file < explicit flags.
        return guarded("synth run", err, [&] {
            auto merged = synth_config_file.empty() ? synth::SynthConfig{} : synth::load_config(synth_config_file);
            auto apply = [&](const char* flag, auto& dst, const auto& src) {
                if (run->count(flag) > 0) dst = src;
            };
            apply("--d", merged.d, cfg.d);
            apply("--n-lab", merged.n_lab, cfg.n_lab);
            apply("--n-unl", merged.n_unl, cfg.n_unl);
            apply("--n-test", merged.n_test, cfg.n_test);
            apply("--x-scale", merged.x_scale, cfg.x_scale);
            apply("--noise-scale", merged.noise_scale, cfg.noise_scale);
            apply("--hidden", merged.hidden, cfg.hidden);
            apply("--lr", merged.lr, cfg.lr);
            apply("--batch", merged.batch, cfg.batch);
            apply("--epochs", merged.epochs, cfg.epochs);
            apply("--keep-frac", merged.keep_frac, cfg.keep_frac);
            apply("--rounds", merged.rounds, cfg.rounds);
            apply("--seed", merged.rng_seed, cfg.rng_seed);
            apply("--relabel", merged.relabel, cfg.relabel);
            apply("--warm-start", merged.warm_start, cfg.warm_start);
            if (run->count("--nll-reduction") > 0) {
                merged.nll_reduction = nll_reduction == "sum" ? synth::NllReduction::Sum : synth::NllReduction::Mean;
            }
            SynthOptions resolved{merged, synth_opts.output};
            const int code = run_synth(resolved, out, err);
            if (code != kOk) throw Error(code == kIoError ? Errc::IoFailure : Errc::ConfigError, "synth run failed");
        });
    }
    if (*l) return run_loop(loop, out, err);
    return kValidationError;
}

}  // namespace tricon::cli
