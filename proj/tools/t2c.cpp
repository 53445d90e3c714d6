#include "t2c/api.hpp"
#include "t2c/corpus.hpp"
#include "t2c/error.hpp"
#include "t2c/eval.hpp"
#include "t2c/model_io.hpp"
#include "t2c/service.hpp"
#include "t2c/training.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace t2c;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::size_t> parse_index_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != item.size() || item[0] == '-') throw UsageError("not a field index: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<ChartType> parse_types(const std::vector<std::string>& items) {
    std::vector<ChartType> out;
    for (const std::string& joined : items) {
        std::stringstream ss(joined);
        std::string name;
        while (std::getline(ss, name, ',')) {
            const auto t = parse_chart_type(name);
            if (!t) throw UsageError("unknown chart type '" + name + "'");
            out.push_back(*t);
        }
    }
    return out;
}

Regime parse_regime(const std::string& text) {
    if (text == "mixed") return Regime::mixed();
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        const auto t = parse_chart_type(text.substr(colon + 1));
        const std::string kind = text.substr(0, colon);
        if (t && kind == "transfer") return Regime::transfer(*t);
        if (t && kind == "separate") return Regime::separate(*t);
    }
    throw UsageError("regime must be mixed, transfer:<type> or separate:<type>");
}

std::string default_model_path(const std::string& given) {
    if (!given.empty()) return given;
    if (const char* env = std::getenv("T2C_MODEL")) return env;
    throw UsageError("no model given (use --model or set T2C_MODEL)");
}

Table read_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open table '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_table_body(buf.str(), fs::path(path).stem().string());
}

Corpus read_split(const std::string& dir, const std::string& name) {
    const fs::path p = fs::path(dir) / (name + ".jsonl");
    if (!fs::exists(p)) throw Error(ErrorCode::IoError, "missing split file " + p.string());
    return read_corpus_file(p.string());
}

std::vector<double> parse_ratios(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw UsageError("bad ratio '" + item + "'");
        }
    }
    if (out.size() != 3) throw UsageError("ratios must look like 7:1:2");
    return out;
}

// ---- subcommands ----

int cmd_synth(std::size_t size, std::uint64_t seed, const std::string& out) {
    SynthSpec spec;
    spec.size = size;
    spec.seed = seed;
    const Corpus c = synth_corpus(spec);
    write_corpus_file(out, c);
    std::cerr << "wrote " << c.size() << " entries to " << out << "\n";
    return 0;
}

int cmd_prep(const std::string& in, const std::string& out, std::size_t k, const std::string& ratios,
             std::uint64_t seed) {
    const auto r = parse_ratios(ratios);
    const Corpus raw = read_corpus_file(in);
    const Corpus deduped = dedup(raw);
    const Corpus sampled = down_sample(deduped, k, seed);
    const CorpusSplits s = split(sampled, {{r[0], r[1], r[2]}, seed});
    fs::create_directories(out);
    write_corpus_file((fs::path(out) / "train.jsonl").string(), s.train);
    write_corpus_file((fs::path(out) / "valid.jsonl").string(), s.valid);
    write_corpus_file((fs::path(out) / "test.jsonl").string(), s.test);
    const json summary = {{"raw", raw.size()},       {"deduplicated", deduped.size()}, {"sampled", sampled.size()},
                          {"train", s.train.size()}, {"valid", s.valid.size()},        {"test", s.test.size()}};
    std::cout << summary.dump(2) << "\n";
    return 0;
}

struct TrainArgs {
    std::string corpus, regime = "mixed", config = "tiny", out, from, embedder = "hashed";
    std::size_t tf = 30, ss = 5, batch = 32, update_every = 1;
    double lr = 1e-4;
    std::uint64_t seed = 1;
};

int cmd_train(const TrainArgs& a) {
    const Regime regime = parse_regime(a.regime);
    const Corpus train = read_split(a.corpus, "train");
    const Corpus valid = read_split(a.corpus, "valid");

    std::unique_ptr<Model> model;
    if (regime.kind == RegimeKind::Transfer) {
        if (a.from.empty()) throw UsageError("transfer training needs --from <mixed model>");
        model = transfer_model(*load_model_file(a.from), a.seed);
    } else {
        std::vector<TablePtr> tables;
        for (const CorpusEntry& e : train) tables.push_back(e.table);
        SemanticEmbedder emb =
            a.embedder == "hashed" ? SemanticEmbedder::hashed(50) : SemanticEmbedder::pretrained(a.embedder);
        model = std::make_unique<Model>(nn::ModelConfig::from_preset(a.config),
                                        FeatureExtractor(std::move(emb), fit_feature_norms(tables)), a.seed);
    }

    TrainPlan plan;
    plan.regime = regime;
    plan.tf_epochs = a.tf;
    plan.ss_epochs = a.ss;
    plan.batch_size = a.batch;
    plan.update_every = a.update_every;
    plan.adam.lr = a.lr;
    plan.seed = a.seed;

    const std::string metrics_path = a.out + ".metrics.csv";
    std::ofstream metrics(metrics_path);
    if (!metrics) throw Error(ErrorCode::IoError, "cannot write " + metrics_path);
    metrics << "epoch,phase,loss,valid_r1,valid_r3,seconds\n";
    const auto t0 = std::chrono::steady_clock::now();
    Trainer trainer(*model, plan, train, valid);
    const auto history = trainer.run([&](const EpochMetrics& m) {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        metrics << m.epoch << ',' << m.phase << ',' << m.loss << ',' << m.valid_r1 << ',' << m.valid_r3 << ','
                << secs << std::endl;
        std::cerr << "epoch " << m.epoch << " [" << m.phase << "] loss " << m.loss << " valid R@1 " << m.valid_r1
                  << " R@3 " << m.valid_r3 << "\n";
    });
    save_model_file(*model, a.out);

    const json manifest = {
        {"model", a.out},
        {"modelVersion", model_version(a.out)},
        {"regime", regime.name()},
        {"config", a.config},
        {"parameters", model->parameter_count()},
        {"seed", a.seed},
        {"epochs", {{"tf", a.tf}, {"ss", a.ss}}},
        {"optimizer", {{"lr", a.lr}, {"batch", a.batch}, {"updateEvery", a.update_every}}},
        {"trainEntries", train.size()},
        {"validEntries", valid.size()},
        {"metrics", metrics_path},
        {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
    std::ofstream(a.out + ".manifest.json") << manifest.dump(2) << "\n";
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& corpus_path, const std::string& ks, bool oracle,
             const std::vector<std::string>& types, bool no_design) {
    for (std::size_t k : parse_index_list(ks))
        if (k != 1 && k != 3) throw UsageError("only k = 1 and k = 3 are reported");
    const Corpus corpus = read_corpus_file(corpus_path);
    EvalOptions opt;
    opt.search.seed_types = parse_types(types);
    opt.design_choices = !no_design;
    EvalReport report;
    if (oracle) {
        CorpusOracleScorer scorer;
        for (const CorpusEntry& e : corpus) {
            std::vector<ChartSequence> legal;
            for (const ChartSequence& c : e.charts)
                if (is_legal_prefix(*e.table, c, {})) legal.push_back(c);
            if (!legal.empty()) scorer.add(e.table, legal);
        }
        opt.search.expand_limit = std::max<std::size_t>(opt.search.expand_limit, scorer.max_prefix_count());
        report = evaluate(scorer, corpus, opt);
    } else {
        const ModelPtr model = load_model_file(default_model_path(model_path));
        report = evaluate(DqnScorer(model), corpus, opt);
    }
    std::cout << report.to_json().dump(2) << "\n";
    std::cerr << report.to_text();
    return 0;
}

int cmd_recommend(const std::string& model_path, const std::string& table_path, const std::string& fields,
                  const std::vector<std::string>& types, std::size_t top, const std::string& export_fmt,
                  bool as_json) {
    if (!export_fmt.empty() && export_fmt != "vegalite") throw UsageError("--export supports only 'vegalite'");
    const ModelPtr model = load_model_file(default_model_path(model_path));
    const Table table = read_table_file(table_path);
    RecommendQuery q;
    q.fields = parse_index_list(fields);
    q.types = parse_types(types);
    q.top = top;
    q.with_spec = as_json || !export_fmt.empty();
    const json out = recommend_json(*model, table, q);
    if (as_json) {
        std::cout << out.dump() << "\n";
        return 0;
    }
    for (const json& r : out.at("recommendations")) {
        std::cout << r.at("sequence").get<std::string>() << "\t" << r.at("score").get<double>() << "\n";
        if (!export_fmt.empty()) std::cout << r.at("vegalite").dump() << "\n";
    }
    return 0;
}

int cmd_export_embeddings(const std::string& model_path, const std::string& corpus_path, const std::string& out) {
    const ModelPtr model = load_model_file(default_model_path(model_path));
    const Corpus corpus = read_corpus_file(corpus_path);
    std::ofstream f(out);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + out);
    const std::size_t dim = 2 * model->config().encoder_hidden;
    f << "table_id\tfield_index\theader\ttype\trole";
    for (std::size_t i = 0; i < dim; ++i) f << "\tv" << i;
    f << "\n";
    std::size_t rows = 0;
    for (const CorpusEntry& e : corpus) {
        const auto vectors = field_embeddings(*model, *e.table);
        for (const Field& fld : e.table->fields()) {
            std::string header = fld.header;
            std::replace(header.begin(), header.end(), '\t', ' ');
            f << e.table->id() << '\t' << fld.index << '\t' << header << '\t' << to_string(fld.type) << '\t'
              << to_string(fld.role);
            for (float v : vectors[fld.index]) f << '\t' << v;
            f << '\n';
            ++rows;
        }
    }
    std::cerr << "wrote " << rows << " field vectors to " << out << "\n";
    return 0;
}

Service* g_service = nullptr;

int cmd_serve(const std::string& model_path, const std::string& host, int port, std::size_t cache) {
    const std::string path = default_model_path(model_path);
    ServiceOptions opt;
    opt.cache_capacity = cache;
    opt.model_path = path;
    Service service(load_model_file(path), model_version(path), opt);
    g_service = &service;
    std::signal(SIGINT, [](int) {
        if (g_service) g_service->stop();
    });
    std::signal(SIGTERM, [](int) {
        if (g_service) g_service->stop();
    });
    std::cerr << "listening on http://" << host << ":" << port << "\n";
    if (!service.listen(host, port)) throw Error(ErrorCode::IoError, "cannot listen on port " + std::to_string(port));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Table-to-chart recommendation"};
    app.require_subcommand(1);

    std::size_t synth_size = 5000;
    std::uint64_t seed = 1;
    std::string out;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
    synth->add_option("--size", synth_size);
    synth->add_option("--seed", seed);
    synth->add_option("--out", out)->required();

    std::string in, ratios = "7:1:2";
    std::size_t k = 10;
    auto* prep = app.add_subcommand("prep", "Deduplicate, down-sample and split a corpus");
    prep->add_option("--in", in)->required();
    prep->add_option("--out", out)->required();
    prep->add_option("--k", k);
    prep->add_option("--ratios", ratios);
    prep->add_option("--seed", seed);

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "Train a model");
    train->add_option("--corpus", ta.corpus, "directory with train/valid jsonl")->required();
    train->add_option("--regime", ta.regime);
    train->add_option("--config", ta.config)->check(CLI::IsMember({"tiny", "small", "medium", "large"}));
    train->add_option("--epochs-tf", ta.tf);
    train->add_option("--epochs-ss", ta.ss);
    train->add_option("--batch", ta.batch);
    train->add_option("--update-every", ta.update_every, "tables between replay updates");
    train->add_option("--lr", ta.lr);
    train->add_option("--seed", ta.seed);
    train->add_option("--from", ta.from, "mixed model whose encoder a transfer regime reuses");
    train->add_option("--embedder", ta.embedder, "'hashed' or a word-vector file");
    train->add_option("--out", ta.out)->required();

    std::string model_path, corpus_path, ks = "1,3", table_path, fields, export_fmt;
    std::vector<std::string> types;
    bool oracle = false, no_design = false, as_json = false;
    std::size_t top = 3;
    auto* eval = app.add_subcommand("eval", "Evaluate recall on a corpus");
    eval->add_option("--model", model_path);
    eval->add_option("--corpus", corpus_path)->required();
    eval->add_option("--k", ks);
    eval->add_option("--type", types, "seed chart types (default: major types)");
    eval->add_flag("--oracle", oracle, "score with q* of the corpus charts");
    eval->add_flag("--no-design-choices", no_design);

    auto* rec = app.add_subcommand("recommend", "Recommend charts for a table");
    rec->add_option("--model", model_path);
    rec->add_option("--table", table_path, "CSV or table JSON")->required();
    rec->add_option("--fields", fields, "required field set, e.g. 1,2,0");
    rec->add_option("--type", types, "allowed chart types");
    rec->add_option("--top", top);
    rec->add_option("--export", export_fmt, "vegalite");
    rec->add_flag("--json", as_json, "print the HTTP API response body");

    auto* emb = app.add_subcommand("export-embeddings", "Write per-field encoder vectors as TSV");
    emb->add_option("--model", model_path);
    emb->add_option("--corpus", corpus_path)->required();
    emb->add_option("--out", out)->required();

    std::string host = "0.0.0.0";
    int port = 8765;
    std::size_t cache = 256;
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    serve->add_option("--model", model_path);
    serve->add_option("--host", host);
    serve->add_option("--port", port);
    serve->add_option("--cache", cache, "tables kept in the LRU cache");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*synth) return cmd_synth(synth_size, seed, out);
        if (*prep) return cmd_prep(in, out, k, ratios, seed);
        if (*train) return cmd_train(ta);
        if (*eval) return cmd_eval(model_path, corpus_path, ks, oracle, types, no_design);
        if (*rec) return cmd_recommend(model_path, table_path, fields, types, top, export_fmt, as_json);
        if (*emb) return cmd_export_embeddings(model_path, corpus_path, out);
        if (*serve) return cmd_serve(model_path, host, port, cache);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << json{{"error", {{"code", error_code_name(e.code())}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"code", "Internal"}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    }
    return 2;
}
