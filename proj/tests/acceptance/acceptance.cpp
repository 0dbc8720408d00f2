// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: tricon_acceptance <path-to-tricon-cli>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tricon/consistency.hpp"
#include "tricon/metrics.hpp"
#include "tricon/record_io.hpp"
#include "tricon/similarity.hpp"
#include "tricon/synth/lab.hpp"
#include "tricon/synth/net.hpp"
#include "tricon/taskgen.hpp"

using namespace tricon;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string g_cli;

int run_cli(const std::string& args, const fs::path& stdout_file) {
    const std::string cmd = "\"" + g_cli + "\" " + args + " > \"" + stdout_file.string() + "\" 2> /dev/null";
    return std::system(cmd.c_str());
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome a1_synthetic_lab() {
    Outcome o;
    const std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    std::vector<std::future<std::vector<synth::SynthMetrics>>> runs;
    for (auto s : seeds) {
        runs.push_back(std::async(std::launch::async, [s] {
            synth::SynthConfig c;
            c.rng_seed = s;
            return synth::self_refine(c);
        }));
    }
    std::vector<double> nll0, mse0, r20, dn, dm, dr;
    for (auto& f : runs) {
        const auto h = f.get();
        nll0.push_back(h.front().nll);
        mse0.push_back(h.front().mse);
        r20.push_back(h.front().r2);
        dn.push_back(h.front().nll - h.back().nll);
        dm.push_back(h.front().mse - h.back().mse);
        dr.push_back(h.back().r2 - h.front().r2);
    }
    const double n = median(nll0), m = median(mse0), r = median(r20);
    const double d_n = median(dn), d_m = median(dm), d_r = median(dr);
    o.check(std::abs(n - 1.18) <= 0.25, "baseline NLL " + fmt(n));
    o.check(std::abs(m - 0.47) <= 0.12, "baseline MSE " + fmt(m));
    o.check(std::abs(r - 0.76) <= 0.08, "baseline R2 " + fmt(r));
    o.check(d_n >= 0.10, "dNLL " + fmt(d_n));
    o.check(d_m >= 0.08, "dMSE " + fmt(d_m));
    o.check(d_r >= 0.03, "dR2 " + fmt(d_r));
    const std::string summary = "median baseline NLL " + fmt(n) + " MSE " + fmt(m) + " R2 " + fmt(r) +
                                ", improvement NLL " + fmt(d_n) + " MSE " + fmt(d_m) + " R2 " + fmt(d_r);
    o.detail = o.pass ? summary : summary + " | " + o.detail;
    return o;
}

Outcome a2_gradients() {
    Outcome o;
    synth::Rng rng(2024);
    double worst = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
        const auto d = 1 + rng.below(5);
        const std::vector<std::size_t> hidden{2 + rng.below(7), 2 + rng.below(7)};
        const auto p = synth::init_params(d, hidden, rng.next());
        const auto n = static_cast<Eigen::Index>(1 + rng.below(4));
        synth::Matrix x(n, static_cast<Eigen::Index>(d)), y(n, static_cast<Eigen::Index>(d));
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            x.data()[i] = rng.laplace(1.0);
            y.data()[i] = rng.normal();
        }
        worst = std::max(worst, synth::grad_check(p, x, y));
    }
    o.check(worst <= 1e-4, "max relative error " + std::to_string(worst));
    if (o.pass) o.detail = "max relative error " + std::to_string(worst) + " over 100 draws";
    return o;
}

Outcome a3_scoring_oracle() {
    Outcome o;
    LexicalMeasures m;
    const auto f = fixtures::scoring_fixture(200, 2025);
    std::set<QaType> types;
    for (const auto& t : f.triplets) types.insert(t.qa_type);
    o.check(types.size() == 5, "fixture covers " + std::to_string(types.size()) + " categories");

    const auto scored = score_all(f.triplets, f.reconstructions, m, 4);
    double worst = 0.0;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        const auto want = oracle::score(f.triplets[i], f.reconstructions[i]);
        if (want.sim_q.has_value() != scored[i].sim_q.has_value() ||
            want.sim_a.has_value() != scored[i].sim_a.has_value()) {
            o.check(false, "component presence differs at " + f.triplets[i].id);
            continue;
        }
        worst = std::max(worst, std::abs(want.score - scored[i].score));
        if (want.sim_q) worst = std::max(worst, std::abs(*want.sim_q - *scored[i].sim_q));
        if (want.sim_a) worst = std::max(worst, std::abs(*want.sim_a - *scored[i].sim_a));
    }
    o.check(worst <= 1e-12, "max score deviation " + std::to_string(worst));

    std::map<QaType, std::map<double, int>> values;
    bool ties = false;
    for (const auto& s : scored) ties |= ++values[s.triplet.qa_type][s.score] > 1;
    o.check(ties, "fixture has no tied scores");

    const auto filtered = filter_top(scored, 0.2, true);
    const auto want_pos = oracle::filter_positions(scored, 0.2, true);
    std::vector<std::string> got, want;
    for (const auto& s : filtered.retained) got.push_back(s.triplet.id);
    // Oracle order: category, then descending score, then input position.
    auto canon = want_pos;
    std::stable_sort(canon.begin(), canon.end(), [&](std::size_t a, std::size_t b) {
        if (scored[a].triplet.qa_type != scored[b].triplet.qa_type)
            return scored[a].triplet.qa_type < scored[b].triplet.qa_type;
        return scored[a].score > scored[b].score;
    });
    for (auto i : canon) want.push_back(scored[i].triplet.id);
    o.check(got == want, "filter_top retained set differs from sort-and-slice");
    if (o.pass) {
        o.detail = "200 records, max deviation " + std::to_string(worst) + ", " + std::to_string(got.size()) +
                   " retained at p=0.2";
    }
    return o;
}

Outcome a4_masks() {
    Outcome o;
    auto counts = [](const std::vector<TaskKind>& k) {
        return std::array<long, 3>{std::count(k.begin(), k.end(), TaskKind::I2QA),
                                   std::count(k.begin(), k.end(), TaskKind::IA2Q),
                                   std::count(k.begin(), k.end(), TaskKind::IQ2A)};
    };
    const auto first = assign_masks(1000, MaskRatios{0.5, 0.2, 0.3}, 42);
    o.check(counts(first) == std::array<long, 3>{500, 200, 300}, "default ratios");
    const MaskRatios balanced{1.0 / 3, 1.0 / 3, 1.0 / 3};
    o.check(counts(assign_masks(10, balanced, 42)) == std::array<long, 3>{3, 3, 4}, "balanced n=10");
    o.check(counts(assign_masks(1000, balanced, 42)) == std::array<long, 3>{333, 333, 334}, "balanced n=1000");
    for (int i = 0; i < 10; ++i) o.check(assign_masks(1000, MaskRatios{0.5, 0.2, 0.3}, 42) == first, "repeat differs");
    if (o.pass) o.detail = "500/200/300, balanced 3/3/4 and 333/333/334, 10 identical repeats";
    return o;
}

Outcome a5_diversity() {
    Outcome o;
    std::mt19937_64 rng(5);
    const std::vector<std::string> vocab{"a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l"};
    int compared = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<std::string> corpus;
        std::size_t tokens = 0, bigrams = 0;
        for (std::size_t i = 0, n = 1 + rng() % 100; i < n; ++i) {
            const std::size_t len = rng() % 21;
            std::string s;
            for (std::size_t k = 0; k < len; ++k) s += vocab[rng() % vocab.size()] + " ";
            tokens += len;
            bigrams += len > 1 ? len - 1 : 0;
            corpus.push_back(s);
        }
        if (tokens > 0 && std::abs(ttr(corpus) - oracle::ttr(corpus)) > 1e-12) o.check(false, "ttr trial " + std::to_string(trial));
        if (bigrams > 0 && std::abs(distinct_n(corpus, 2) - oracle::distinct_n(corpus, 2)) > 1e-12)
            o.check(false, "distinct-2 trial " + std::to_string(trial));
        ++compared;
    }
    using T = std::vector<std::string>;
    o.check(std::abs(ttr(T{"a a a"}) - 1.0 / 3) < 1e-15, "ttr(a a a)");
    o.check(std::abs(ttr(T{"the cat sat on the mat"}) - 5.0 / 6) < 1e-15, "ttr(the cat sat on the mat)");
    o.check(std::abs(distinct_n(T{"a b a b"}, 2) - 2.0 / 3) < 1e-15, "distinct-2(a b a b)");
    o.check(std::abs(distinct_n(T{"a a a a"}, 2) - 1.0 / 3) < 1e-15, "distinct-2(a a a a)");
    if (o.pass) o.detail = std::to_string(compared) + " corpora match hash-set oracles; worked values exact";
    return o;
}

Outcome a6_similarity() {
    Outcome o;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        auto box = [&] {
            double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
            return BoundingBox{std::min(a, b), std::min(c, d), std::max(a, b), std::max(c, d)};
        };
        const auto a = box(), b = box();
        worst = std::max(worst, std::abs(iou(a, b) - oracle::monte_carlo_iou(a, b, 100000, i)));
    }
    o.check(worst <= 1e-2, "IoU deviation " + std::to_string(worst));

    std::vector<std::vector<std::string>> seqs;
    for (std::size_t len = 1; len <= 4; ++len) {
        std::size_t count = 1;
        for (std::size_t k = 0; k < len; ++k) count *= 3;
        for (std::size_t code = 0; code < count; ++code) {
            std::vector<std::string> s;
            for (std::size_t k = 0, c = code; k < len; ++k, c /= 3) s.push_back(std::string(1, static_cast<char>('x' + c % 3)));
            seqs.push_back(s);
        }
    }
    auto one_hot = [](const std::vector<std::string>& s) {
        std::vector<Vector> out;
        for (const auto& t : s) {
            Vector v(3, 0.0);
            v[static_cast<std::size_t>(t[0] - 'x')] = 1.0;
            out.push_back(v);
        }
        return out;
    };
    double f1_worst = 0.0;
    for (const auto& a : seqs)
        for (const auto& b : seqs)
            f1_worst = std::max(f1_worst, std::abs(greedy_match_f1(one_hot(a), one_hot(b)) - oracle::exhaustive_identity_f1(a, b)));
    o.check(f1_worst <= 1e-12, "greedy F1 deviation " + std::to_string(f1_worst));

    o.check(exact_match("B", "b") == 1.0, "exact_match(B, b)");
    o.check(exact_match("Yes", "No") == 0.0, "exact_match(Yes, No)");
    o.check(exact_match("B.", "B") == 1.0, "exact_match(B., B)");
    if (o.pass) {
        o.detail = "IoU max deviation " + fmt(worst) + " on 1000 pairs; greedy F1 exact on " +
                   std::to_string(seqs.size() * seqs.size()) + " pairs; exact_match table holds";
    }
    return o;
}

std::vector<std::string> list_files(const fs::path& dir) {
    std::vector<std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir).string());
    std::sort(out.begin(), out.end());
    return out;
}

Outcome a7_loop() {
    Outcome o;
    fixtures::TempDir dir;
    const auto fx = fixtures::loop_fixture(20, 10, 12);
    write_triplets(fx.seed_dataset, dir / "seed.jsonl");
    fixtures::write_file(dir / "model.json", fx.model_table_json);
    std::string manifest;
    for (const auto& i : fx.images) manifest += i + "\n";
    fixtures::write_file(dir / "images.txt", manifest);

    for (const char* w : {"1", "8"}) {
        const auto out = dir / (std::string("out-w") + w);
        const int rc = run_cli("loop --seed-dataset " + q(dir / "seed.jsonl") + " --manifest " + q(dir / "images.txt") +
                                   " --model-table " + q(dir / "model.json") + " --top 0.2 --per-type --workers " + w +
                                   " --out-dir " + q(out),
                               dir / (std::string("report-w") + w + ".jsonl"));
        o.check(rc == 0, std::string("loop exit status with --workers ") + w);
    }
    if (!o.pass) return o;

    const auto a = dir / "out-w1", b = dir / "out-w8";
    const auto files = list_files(a);
    o.check(files == list_files(b), "output file sets differ");
    for (const auto& f : files) o.check(fixtures::read_file(a / f) == fixtures::read_file(b / f), f + " differs");
    o.check(fixtures::read_file(dir / "report-w1.jsonl") == fixtures::read_file(dir / "report-w8.jsonl"),
            "stdout reports differ");

    const auto retained = read_triplets(a / "round-1" / "filtered.jsonl");
    const auto merged = read_triplets(a / "round-1" / "merged.jsonl");
    o.check(!retained.empty(), "nothing retained");
    for (const auto& t : retained) {
        const auto idx = static_cast<std::size_t>(std::find(fx.images.begin(), fx.images.end(), t.image_ref) - fx.images.begin());
        o.check(idx < fx.images.size() && fx.faithful[idx], "corrupted record retained: " + t.image_ref);
    }
    o.check(merged.size() == fx.seed_dataset.size() + retained.size(), "merged size");
    if (o.pass) {
        o.detail = std::to_string(retained.size()) + " faithful records retained of 30, merged " +
                   std::to_string(merged.size()) + " = 12 + " + std::to_string(retained.size()) + ", " +
                   std::to_string(files.size()) + " output files byte-identical for 1 vs 8 workers";
    }
    return o;
}

Outcome a8_roundtrip() {
    Outcome o;
    fixtures::TempDir dir;
    const auto corpus = fixtures::random_triplets(10000, 8);
    write_triplets(corpus, dir / "corpus.jsonl");
    const auto back = read_triplets(dir / "corpus.jsonl");
    o.check(back == corpus, "read(write(x)) != x");
    write_triplets(back, dir / "corpus2.jsonl");
    o.check(fixtures::read_file(dir / "corpus.jsonl") == fixtures::read_file(dir / "corpus2.jsonl"),
            "write(read(write(x))) bytes differ");

    const auto f = fixtures::scoring_fixture(200, 2025);
    {
        std::ofstream out(dir / "recon.jsonl", std::ios::binary);
        write_reconstructed(f.triplets, f.reconstructions, out);
    }
    const std::vector<std::pair<std::string, std::string>> steps{
        {"transform", "transform --input " + q(dir / "corpus.jsonl") + " --seed 7 --output "},
        {"score", "score --input " + q(dir / "recon.jsonl") + " --workers 4 --output "},
        {"filter", "filter --input " + q(dir / "score-1") + " --top 0.2 --excluded " + q(dir / "excluded-RUN") + " --output "},
    };
    for (const auto& [name, args] : steps) {
        for (int run = 1; run <= 2; ++run) {
            const auto target = dir / (name + "-" + std::to_string(run));
            std::string cmd = args + q(target);
            if (const auto at = cmd.find("RUN"); at != std::string::npos) cmd.replace(at, 3, std::to_string(run));
            o.check(run_cli(cmd, dir / "stdout") == 0, name + " exit status");
        }
        const auto one = fixtures::read_file(dir / (name + "-1")), two = fixtures::read_file(dir / (name + "-2"));
        o.check(!one.empty() && one == two, name + " output not byte-identical");
    }
    o.check(fixtures::read_file(dir / "excluded-1") == fixtures::read_file(dir / "excluded-2"), "excluded differs");
    if (o.pass) o.detail = "10000-record round trip exact; transform, score, filter byte-identical across runs";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: tricon_acceptance <path-to-tricon>\n";
        return 2;
    }
    g_cli = argv[1];
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"A1 synthetic self-training improves on baseline", a1_synthetic_lab},
        {"A2 analytic gradients match finite differences", a2_gradients},
        {"A3 consistency scores and top filter match oracles", a3_scoring_oracle},
        {"A4 mask assignment counts and determinism", a4_masks},
        {"A5 TTR and Distinct-2 match oracles", a5_diversity},
        {"A6 IoU, greedy F1 and exact match", a6_similarity},
        {"A7 mock-model loop keeps only faithful records", a7_loop},
        {"A8 round trip and byte determinism", a8_roundtrip},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << " | " << o.detail << std::endl;
        failed += o.pass ? 0 : 1;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
