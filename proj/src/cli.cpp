#include "uwiq/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "uwiq/dataset.hpp"
#include "uwiq/image.hpp"
#include "uwiq/metrics.hpp"
#include "uwiq/mixing.hpp"
#include "uwiq/parallel.hpp"
#include "uwiq/ranker.hpp"
#include "uwiq/rankstats.hpp"

namespace uwiq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flag-level validation failures; anything else is a data error.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("bad numeric field in " + what + ": `" + s + "`");
    }
}

json breakdown_to_json(const std::string& path, const MetricBreakdown& b) {
    return json{{"path", path},         {"uicm", b.uicm},
                {"uism", b.uism},       {"uiconm", b.uiconm},
                {"sigma_chroma", b.sigma_chroma}, {"con_l", b.con_l},
                {"mu_s", b.mu_s},       {"uiqm", b.uiqm},
                {"uciqe", b.uciqe}};
}

json report_to_json(const RankingReport& r) {
    json groups = json::array();
    for (const GroupCorrelation& g : r.groups) {
        groups.push_back(json{{"group_id", g.group_id}, {"krcc", g.krcc}, {"srcc", g.srcc}});
    }
    return json{{"groups", std::move(groups)},
                {"group_count", r.groups.size()},
                {"mean_krcc", r.mean_krcc},
                {"std_krcc", r.std_krcc},
                {"mean_srcc", r.mean_srcc},
                {"std_srcc", r.std_srcc}};
}

json validation_report_json(const ValidationReport& report) {
    json failures = json::array();
    for (const ValidationIssue& f : report.failures) {
        failures.push_back(json{{"id", f.id}, {"what", f.what}});
    }
    return json{{"checked", report.checked}, {"failures", std::move(failures)}};
}

void print_report_table(const RankingReport& r, std::ostream& os) {
    os << "group            krcc      srcc\n";
    for (const GroupCorrelation& g : r.groups) {
        char line[128];
        std::snprintf(line, sizeof(line), "%-14s %7.4f   %7.4f\n", g.group_id.c_str(),
                      g.krcc, g.srcc);
        os << line;
    }
    char tail[256];
    std::snprintf(tail, sizeof(tail),
                  "mean           %7.4f   %7.4f\nstd            %7.4f   %7.4f\n",
                  r.mean_krcc, r.mean_srcc, r.std_krcc, r.std_srcc);
    os << tail;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write: " + path);
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path);
}

template <class T>
void validate_weight_triplet(const std::vector<T>& w, const std::string& flag) {
    if (!w.empty() && w.size() != 3) {
        throw UsageError(flag + " needs exactly three comma-separated values");
    }
}

// ---- score -------------------------------------------------------------

struct ScoreArgs {
    std::vector<std::string> images;
    std::string dir;
    std::string manifest;
    std::vector<double> uiqm_w;
    std::vector<double> uciqe_w;
    std::string out;
};

int cmd_score(const ScoreArgs& a, std::ostream& out, std::ostream& err) {
    validate_weight_triplet(a.uiqm_w, "--uiqm-weights");
    validate_weight_triplet(a.uciqe_w, "--uciqe-weights");
    UiqmWeights uw;
    UciqeWeights cw;
    if (a.uiqm_w.size() == 3) uw = {a.uiqm_w[0], a.uiqm_w[1], a.uiqm_w[2]};
    if (a.uciqe_w.size() == 3) cw = {a.uciqe_w[0], a.uciqe_w[1], a.uciqe_w[2]};

    std::vector<std::string> paths = a.images;
    if (!a.dir.empty()) {
        std::vector<std::string> found;
        if (!fs::is_directory(a.dir)) throw std::runtime_error("not a directory: " + a.dir);
        for (const auto& e : fs::directory_iterator(a.dir)) {
            const std::string ext = e.path().extension().string();
            if (ext == ".png" || ext == ".ppm") found.push_back(e.path().string());
        }
        std::sort(found.begin(), found.end());
        paths.insert(paths.end(), found.begin(), found.end());
    }
    if (!a.manifest.empty()) {
        for (const ManifestEntry& e : load_manifest(a.manifest)) {
            paths.push_back(e.raw_path);
            paths.push_back(e.hq_path);
            if (e.lq_path) paths.push_back(*e.lq_path);
        }
    }
    if (paths.empty()) throw UsageError("score: no input images given");

    json records = json::array();
    for (const std::string& p : paths) {
        records.push_back(breakdown_to_json(p, score_image(load_image(p), uw, cw)));
    }
    const std::string text = records.dump(2) + "\n";
    if (a.out.empty()) {
        out << text;
    } else {
        write_text(a.out, text);
        err << "wrote " << paths.size() << " records to " << a.out << "\n";
    }
    return kExitOk;
}

// ---- mix ---------------------------------------------------------------

struct MixArgs {
    std::string hq, lq, out_dir;
    std::vector<double> ks;
};

int cmd_mix(const MixArgs& a, std::ostream&, std::ostream& err) {
    if (a.ks.empty()) throw UsageError("mix: need at least one ratio via --ks");
    for (double k : a.ks) {
        if (!(k >= 0.0 && k <= 1.0)) throw UsageError("mix: ratios must lie in [0,1]");
    }
    const ImageRGB hq = load_image(a.hq);
    const ImageRGB lq = load_image(a.lq);
    fs::create_directories(a.out_dir);
    for (double k : a.ks) {
        const ImageRGB m = mix(hq, lq, k);
        const std::string path = (fs::path(a.out_dir) / ("mix_" + fmt_double(k) + ".png")).string();
        save_image(m, path);
        err << "wrote " << path << "\n";
    }
    return kExitOk;
}

// ---- synthset ------------------------------------------------------------

struct SynthArgs {
    std::string manifest, out_dir;
    std::vector<double> ks{0.0, 0.2, 0.4, 0.6, 0.8};
    std::string low = "auto";  // auto | lq | raw
};

int cmd_synthset(const SynthArgs& a, std::ostream&, std::ostream& err) {
    if (a.low != "auto" && a.low != "lq" && a.low != "raw") {
        throw UsageError("synthset: --low must be auto, lq or raw");
    }
    if (a.ks.empty()) throw UsageError("synthset: --ks must not be empty");
    for (std::size_t i = 0; i < a.ks.size(); ++i) {
        if (!(a.ks[i] >= 0.0 && a.ks[i] <= 1.0)) {
            throw UsageError("synthset: ratios must lie in [0,1]");
        }
        if (i > 0 && !(a.ks[i] > a.ks[i - 1])) {
            throw UsageError("synthset: ratios must strictly increase");
        }
    }

    const std::vector<ManifestEntry> entries = load_manifest(a.manifest);
    const ValidationReport report = validate_manifest(entries);
    if (!report.ok()) {
        err << validation_report_json(report).dump(2) << "\n";
        throw std::runtime_error("synthset: manifest validation failed");
    }

    fs::create_directories(a.out_dir);
    std::ostringstream gt;
    gt << "source_id,k,rank,path\n";
    for (const ManifestEntry& e : entries) {
        SynthSource src;
        src.id = e.id;
        src.high = load_image(e.hq_path);
        if (a.low == "raw" || (a.low == "auto" && !e.lq_path)) {
            src.low = load_image(e.raw_path);
        } else if (e.lq_path) {
            src.low = load_image(*e.lq_path);
        } else {
            throw std::runtime_error("synthset: entry `" + e.id + "` has no lq image");
        }
        for (const SyntheticGrade& g :
             build_synthetic_testset({std::move(src)}, a.ks)) {
            const std::string name = g.source_id + "_r" + std::to_string(g.gt_rank) + ".png";
            save_image(g.image, (fs::path(a.out_dir) / name).string());
            gt << g.source_id << "," << fmt_double(g.k) << "," << g.gt_rank << "," << name
               << "\n";
        }
    }
    write_text((fs::path(a.out_dir) / "groundtruth.csv").string(), gt.str());
    err << "wrote synthset for " << entries.size() << " sources to " << a.out_dir << "\n";
    return kExitOk;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
    std::string manifest, out, log;
    RankerConfig cfg;
    std::size_t train_count = 0;  // 0 = all entries
    std::string low = "lq";       // low mixing endpoint: lq | raw
};

int cmd_train(const TrainArgs& a, std::ostream&, std::ostream& err) {
    if (a.low != "lq" && a.low != "raw") {
        throw UsageError("train: --low must be lq or raw");
    }
    try {
        validate_config(a.cfg);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const std::vector<ManifestEntry> entries = load_manifest(a.manifest);
    const ValidationReport report = validate_manifest(entries);
    std::vector<std::string> bad_ids;
    if (!report.ok()) {
        err << validation_report_json(report).dump(2) << "\n";
        for (const ValidationIssue& f : report.failures) bad_ids.push_back(f.id);
    }

    const std::size_t want = a.train_count == 0 ? entries.size() : a.train_count;
    const SplitResult sp = split(entries, SplitSpec{want});

    std::vector<ManifestEntry> pool = sp.train;
    if (a.low == "raw") {
        // raw is the low endpoint, so entries without an lq image train too
        pool.assign(entries.begin(), entries.begin() + want);
    } else {
        for (const std::string& id : sp.excluded_train_ids) {
            err << "excluded from training (no lq image): " << id << "\n";
        }
    }

    std::vector<TrainSample> samples;
    for (const ManifestEntry& e : pool) {
        if (std::find(bad_ids.begin(), bad_ids.end(), e.id) != bad_ids.end()) continue;
        const std::string& low_path = a.low == "raw" ? e.raw_path : *e.lq_path;
        samples.push_back({e.id, load_image(e.hq_path), load_image(low_path)});
    }
    if (samples.empty()) {
        throw std::runtime_error(
            "train: no trainable pairs (every usable entry needs hq and lq images "
            "of matching size within the training prefix)");
    }

    RankerModel model = init_model(a.cfg);
    const TrainLog log = train(model, samples, a.cfg);
    save_model(model, a.out);
    if (!a.log.empty()) {
        std::ostringstream csv;
        csv << "epoch,mean_loss\n";
        for (std::size_t i = 0; i < log.epoch_mean_loss.size(); ++i) {
            csv << (i + 1) << "," << fmt_double(log.epoch_mean_loss[i]) << "\n";
        }
        write_text(a.log, csv.str());
    }
    err << "trained on " << samples.size() << " pairs for " << a.cfg.epochs
        << " epochs; model written to " << a.out << "\n";
    return kExitOk;
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
    std::string model;
    std::string metric;  // uiqm | uciqe
    std::string synthset;
    std::string scores;
    std::string out;
    std::vector<double> uiqm_w;
    std::vector<double> uciqe_w;
};

std::vector<Ranking> rankings_from_scores_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scores csv: " + path);
    std::string line;
    if (!std::getline(in, line) ||
        (line != "group_id,item_id,score,gt_rank" &&
         line != "group_id,item_id,score,gt_rank\r")) {
        throw std::runtime_error("scores csv header must be `group_id,item_id,score,gt_rank`");
    }
    std::map<std::string, std::size_t> index;
    std::vector<Ranking> groups;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_row(line);
        if (f.size() != 4) {
            throw std::runtime_error("malformed scores row at line " + std::to_string(lineno));
        }
        const auto [it, fresh] = index.try_emplace(f[0], groups.size());
        if (fresh) groups.push_back(Ranking{f[0], {}});
        groups[it->second].items.push_back(
            {f[1], parse_double(f[2], "scores csv"),
             static_cast<int>(parse_double(f[3], "scores csv"))});
    }
    if (groups.empty()) throw std::runtime_error("scores csv has no rows: " + path);
    return groups;
}

struct GtRow {
    std::string source_id;
    double k;
    int rank;
    std::string path;
};

std::vector<GtRow> read_groundtruth(const std::string& dir) {
    const std::string path = (fs::path(dir) / "groundtruth.csv").string();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing ground truth: " + path);
    std::string line;
    if (!std::getline(in, line) ||
        (line != "source_id,k,rank,path" && line != "source_id,k,rank,path\r")) {
        throw std::runtime_error("groundtruth header must be `source_id,k,rank,path`");
    }
    std::vector<GtRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_row(line);
        if (f.size() != 4) {
            throw std::runtime_error("malformed groundtruth row at line " +
                                     std::to_string(lineno));
        }
        rows.push_back({f[0], parse_double(f[1], "groundtruth"),
                        static_cast<int>(parse_double(f[2], "groundtruth")),
                        (fs::path(dir) / f[3]).string()});
    }
    if (rows.empty()) throw std::runtime_error("groundtruth csv has no rows: " + path);
    return rows;
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    validate_weight_triplet(a.uiqm_w, "--uiqm-weights");
    validate_weight_triplet(a.uciqe_w, "--uciqe-weights");
    const bool have_scorer = !a.model.empty() || !a.metric.empty();
    if (!a.model.empty() && !a.metric.empty()) {
        throw UsageError("eval: --model and --metric are mutually exclusive");
    }
    if (!a.metric.empty() && a.metric != "uiqm" && a.metric != "uciqe") {
        throw UsageError("eval: --metric must be uiqm or uciqe");
    }
    if (a.synthset.empty() == a.scores.empty()) {
        throw UsageError("eval: give exactly one of --synthset or --scores");
    }
    if (!a.scores.empty() && have_scorer) {
        throw UsageError("eval: --scores already contains scores; drop --model/--metric");
    }
    if (!a.synthset.empty() && !have_scorer) {
        throw UsageError("eval: --synthset needs --model or --metric");
    }

    std::vector<Ranking> rankings;
    if (!a.scores.empty()) {
        rankings = rankings_from_scores_csv(a.scores);
    } else {
        UiqmWeights uw;
        UciqeWeights cw;
        if (a.uiqm_w.size() == 3) uw = {a.uiqm_w[0], a.uiqm_w[1], a.uiqm_w[2]};
        if (a.uciqe_w.size() == 3) cw = {a.uciqe_w[0], a.uciqe_w[1], a.uciqe_w[2]};
        RankerModel model;
        const bool use_model = !a.model.empty();
        if (use_model) model = load_model(a.model);

        std::map<std::string, std::size_t> index;
        for (const GtRow& row : read_groundtruth(a.synthset)) {
            const ImageRGB img = load_image(row.path);
            double score = 0.0;
            if (use_model) {
                score = forward(model, img).value;
            } else if (a.metric == "uiqm") {
                score = score_image(img, uw, cw).uiqm;
            } else {
                score = score_image(img, uw, cw).uciqe;
            }
            const auto [it, fresh] = index.try_emplace(row.source_id, rankings.size());
            if (fresh) rankings.push_back(Ranking{row.source_id, {}});
            rankings[it->second].items.push_back({row.path, score, row.rank});
        }
    }

    const RankingReport report = evaluate_groups(rankings);
    const std::string text = report_to_json(report).dump(2) + "\n";
    if (a.out.empty()) {
        out << text;
        print_report_table(report, err);
    } else {
        write_text(a.out, text);
        print_report_table(report, out);
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"no-reference quality toolkit for enhanced underwater images"};
    app.require_subcommand(1);

    bool serial = false;
    int threads = 0;
    app.add_flag("--serial", serial, "run compute kernels on one thread");
    app.add_option("--threads", threads, "OpenMP thread count (0 = runtime default)");

    ScoreArgs sa;
    CLI::App* score = app.add_subcommand("score", "classical quality metrics as JSON");
    score->add_option("images", sa.images, "image files (png/ppm)");
    score->add_option("--dir", sa.dir, "score every png/ppm in a directory");
    score->add_option("--manifest", sa.manifest, "score all images referenced by a manifest");
    score->add_option("--uiqm-weights", sa.uiqm_w, "c1,c2,c3")->delimiter(',');
    score->add_option("--uciqe-weights", sa.uciqe_w, "c1,c2,c3")->delimiter(',');
    score->add_option("--out", sa.out, "write the JSON records here instead of stdout");

    MixArgs ma;
    CLI::App* mixc = app.add_subcommand("mix", "blend an hq/lq pair at fixed ratios");
    mixc->add_option("--hq", ma.hq, "higher-quality image")->required();
    mixc->add_option("--lq", ma.lq, "lower-quality image")->required();
    mixc->add_option("--ks", ma.ks, "mixing ratios in [0,1]")->required()->delimiter(',');
    mixc->add_option("--out-dir", ma.out_dir, "output directory")->required();

    SynthArgs ya;
    CLI::App* synth = app.add_subcommand("synthset", "graded test set + ground-truth csv");
    synth->add_option("--manifest", ya.manifest, "dataset manifest csv")->required();
    synth->add_option("--ks", ya.ks, "strictly increasing ratios")->delimiter(',');
    synth->add_option("--out-dir", ya.out_dir, "output directory")->required();
    synth->add_option("--low", ya.low, "low-quality endpoint: auto|lq|raw");

    TrainArgs ta;
    CLI::App* trainc = app.add_subcommand("train", "train the ranking scorer");
    trainc->add_option("--manifest", ta.manifest, "dataset manifest csv")->required();
    trainc->add_option("--out", ta.out, "model json path")->required();
    trainc->add_option("--log", ta.log, "per-epoch mean loss csv");
    trainc->add_option("--epochs", ta.cfg.epochs, "training epochs");
    trainc->add_option("--lr", ta.cfg.learning_rate, "Adam learning rate");
    trainc->add_option("--epsilon", ta.cfg.epsilon, "ranking margin");
    trainc->add_option("--seed", ta.cfg.seed, "rng seed for init and sampling");
    trainc->add_option("--train-count", ta.train_count, "manifest prefix used for training");
    trainc->add_option("--max-side", ta.cfg.train_max_side, "downscale cap for training images");
    trainc->add_option("--low", ta.low, "low mixing endpoint: lq|raw");

    EvalArgs ea;
    CLI::App* evalc = app.add_subcommand("eval", "rank-correlation report");
    evalc->add_option("--model", ea.model, "trained model json");
    evalc->add_option("--metric", ea.metric, "baseline scorer: uiqm|uciqe");
    evalc->add_option("--synthset", ea.synthset, "directory with groundtruth.csv");
    evalc->add_option("--scores", ea.scores, "pre-scored csv (group_id,item_id,score,gt_rank)");
    evalc->add_option("--out", ea.out, "write report json here");
    evalc->add_option("--uiqm-weights", ea.uiqm_w, "c1,c2,c3")->delimiter(',');
    evalc->add_option("--uciqe-weights", ea.uciqe_w, "c1,c2,c3")->delimiter(',');

    std::vector<const char*> argv;
    argv.push_back("uwiq");
    for (const std::string& s : args) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    par::set_mode(serial ? par::Mode::serial : par::Mode::openmp);
    if (threads > 0) par::set_threads(threads);

    try {
        if (score->parsed()) return cmd_score(sa, out, err);
        if (mixc->parsed()) return cmd_mix(ma, out, err);
        if (synth->parsed()) return cmd_synthset(ya, out, err);
        if (trainc->parsed()) return cmd_train(ta, out, err);
        if (evalc->parsed()) return cmd_eval(ea, out, err);
        err << "error: no subcommand\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
}

}  // namespace uwiq
