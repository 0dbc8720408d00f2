#include "fixtures.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tricon/bbox.hpp"
#include "tricon/similarity.hpp"

namespace tricon::fixtures {

TempDir::TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() / ("tricon-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

namespace {

const std::vector<std::string> kWords{
    "red", "blue", "green", "cat", "dog", "bird", "table", "chair", "window", "street", "car", "tree",
    "person", "shirt", "hat", "left", "right", "top", "bottom", "small", "large", "two", "three", "sign",
    "bus", "train", "plate", "apple", "orange", "banana", "water", "sky", "cloud", "road", "grass", "white"};

struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}

    std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
    bool coin(double p) { return std::bernoulli_distribution(p)(rng); }
    const std::string& word() { return kWords[below(kWords.size())]; }

    std::string words(std::size_t n) {
        std::string s;
        for (std::size_t i = 0; i < n; ++i) {
            if (i) s += ' ';
            s += word();
        }
        return s;
    }

    std::string sentence(std::size_t lo, std::size_t hi) {
        auto s = words(lo + below(hi - lo + 1));
        s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
        return s + (coin(0.5) ? "." : "?");
    }

    // Replaces roughly `rate` of the words.
    std::string perturb(const std::string& text, double rate) {
        std::istringstream in(text);
        std::string out, w;
        while (in >> w) {
            if (!out.empty()) out += ' ';
            out += coin(rate) ? word() : w;
        }
        return out;
    }

    std::string box() {
        // Two decimals keeps the text exact and the ordering easy to satisfy.
        auto coord = [&] { return below(101) / 100.0; };
        double x1 = coord(), x2 = coord(), y1 = coord(), y2 = coord();
        if (x1 > x2) std::swap(x1, x2);
        if (y1 > y2) std::swap(y1, y2);
        return format_bbox({x1, y1, x2, y2});
    }

    std::string jitter(const std::string& box_text) {
        auto b = parse_bbox(box_text);
        auto j = [&](double v) { return std::clamp(v + (static_cast<double>(below(21)) - 10.0) / 100.0, 0.0, 1.0); };
        BoundingBox out{j(b.x1), j(b.y1), j(b.x2), j(b.y2)};
        if (out.x1 > out.x2) std::swap(out.x1, out.x2);
        if (out.y1 > out.y2) std::swap(out.y1, out.y2);
        return format_bbox(out);
    }
};

const char* kShortAnswer = "Answer the question using a single word or phrase.";
const char* kOptionLetter = "Answer with the option's letter from the given choices directly.";
const char* kBoxPrompt = "Please provide the bounding box coordinate of the region this sentence describes:";
const char* kRegionPrompt = "Please provide a short description for this region:";
const char* kCaptionPrompt = "Provide a one-sentence caption for the provided image.";

}  // namespace

std::vector<Triplet> random_triplets(std::size_t n, std::uint64_t seed) {
    Gen g(seed);
    const std::vector<std::string> odd{
        "caf\xc3\xa9", "na\xc3\xafve", "\xe6\x97\xa5\xe6\x9c\xac", "\"quoted\"", "back\\slash", "tab\there",
        "line\nbreak", "emoji \xf0\x9f\x98\x80", "\xce\x95\xce\xbb\xce\xbb\xce\xac\xce\xb4\xce\xb1"};
    std::vector<Triplet> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Triplet t;
        t.id = "rec-" + std::to_string(i);
        t.image_ref = "images/" + std::to_string(g.below(100000)) + ".jpg";
        t.qa_type = kAllQaTypes[g.below(kAllQaTypes.size())];
        t.question = g.sentence(2, 8);
        t.answer = g.sentence(1, 12);
        if (g.coin(0.3)) t.question += " " + odd[g.below(odd.size())];
        if (g.coin(0.3)) t.answer += " " + odd[g.below(odd.size())];
        if (t.qa_type == QaType::Region) {
            if (g.coin(0.5)) t.answer = g.box();
            else t.question = std::string(kRegionPrompt) + " " + g.box();
        }
        out.push_back(std::move(t));
    }
    return out;
}

ScoringFixture scoring_fixture(std::size_t n, std::uint64_t seed) {
    Gen g(seed);
    ScoringFixture f;
    for (std::size_t i = 0; i < n; ++i) {
        Triplet t;
        t.id = "s" + std::to_string(i);
        t.image_ref = "img" + std::to_string(i % 37) + ".jpg";
        t.qa_type = kAllQaTypes[(i * 7 + g.below(2)) % kAllQaTypes.size()];
        Reconstruction r;
        r.triplet_id = t.id;

        // Repeat an earlier record's content under a new id: equal scores.
        if (i >= 10 && g.coin(0.15)) {
            const auto k = g.below(i);
            t.qa_type = f.triplets[k].qa_type;
            t.question = f.triplets[k].question;
            t.answer = f.triplets[k].answer;
            r = f.reconstructions[k];
            r.triplet_id = t.id;
            f.triplets.push_back(std::move(t));
            f.reconstructions.push_back(std::move(r));
            continue;
        }

        const auto variant = g.below(6);  // 0 faithful, 1-2 perturbed, 3 templated, 4 empty, 5 failed
        switch (t.qa_type) {
            case QaType::VQA:
                t.question = g.sentence(3, 8) + " " + kShortAnswer;
                t.answer = g.words(1 + g.below(3));
                r.q_prime = variant == 0 ? t.question : g.perturb(t.question, 0.4);
                r.a_prime = variant == 0 ? t.answer : g.perturb(t.answer, 0.5);
                if (variant == 3) r.q_prime = std::string(kShortAnswer) + " " + r.q_prime;
                break;
            case QaType::VisualChat:
                t.question = g.sentence(4, 10);
                t.answer = g.sentence(26, 45);
                r.q_prime = variant == 0 ? t.question : g.perturb(t.question, 0.3);
                r.a_prime = variant == 0 ? t.answer : g.perturb(t.answer, 0.2 + 0.1 * static_cast<double>(variant));
                break;
            case QaType::Region:
                if (g.coin(0.5)) {
                    const auto box = g.box();
                    t.question = std::string(kBoxPrompt) + " the " + g.words(2 + g.below(3)) + ".";
                    t.answer = box;
                    r.q_prime = variant == 0 ? t.question : g.perturb(t.question, 0.3);
                    r.a_prime = variant == 0 ? box : g.jitter(box);
                    if (variant == 3) r.a_prime = "The region is " + r.a_prime + ".";
                    if (variant == 5 && g.coin(0.5)) r.a_prime = "somewhere near the " + g.word();
                    if (variant == 5 && g.coin(0.5)) r.a_prime = box + " or " + g.box();
                } else {
                    const auto box = g.box();
                    t.question = std::string(kRegionPrompt) + " " + box;
                    t.answer = "A " + g.words(2 + g.below(4)) + ".";
                    r.q_prime = variant == 0 ? t.question : std::string(kRegionPrompt) + " " + g.jitter(box);
                    r.a_prime = variant == 0 ? t.answer : g.perturb(t.answer, 0.4);
                    if (variant == 5 && g.coin(0.5)) r.q_prime = "Describe the " + g.word() + ".";
                }
                break;
            case QaType::Caption:
                t.question = kCaptionPrompt;
                t.answer = g.sentence(6, 30);
                r.q_prime = g.sentence(3, 6);
                r.a_prime = variant == 0 ? t.answer : g.perturb(t.answer, 0.35);
                break;
            case QaType::Choice: {
                static const char* letters[] = {"A", "B", "C", "D"};
                t.question = "Which is it? A. " + g.word() + " B. " + g.word() + " C. " + g.word() + " D. " +
                             g.word() + " " + kOptionLetter;
                t.answer = letters[g.below(4)];
                r.q_prime = g.sentence(3, 6);
                r.a_prime = variant == 0 || g.coin(0.4) ? t.answer : letters[g.below(4)];
                if (variant == 3) r.a_prime = " " + std::string(1, static_cast<char>(std::tolower(r.a_prime[0]))) + ". ";
                break;
            }
        }
        if (variant == 4) {
            if (g.coin(0.5)) r.q_prime.clear();
            else r.a_prime.clear();
        }
        if (variant == 5 && t.qa_type != QaType::Region) {
            if (g.coin(0.5)) {
                r.q_prime.clear();
                r.q_failed = true;
            } else {
                r.a_prime.clear();
                r.a_failed = true;
            }
        }
        f.triplets.push_back(std::move(t));
        f.reconstructions.push_back(std::move(r));
    }
    return f;
}

LoopFixture loop_fixture(std::size_t faithful, std::size_t corrupted, std::size_t seed_size) {
    Gen g(7);
    LoopFixture f;
    for (std::size_t i = 0; i < seed_size; ++i) {
        Triplet t;
        t.id = "seed-" + std::to_string(i);
        t.image_ref = "seed/" + std::to_string(i) + ".jpg";
        t.qa_type = QaType::VQA;
        t.question = g.sentence(3, 7);
        t.answer = g.words(1);
        f.seed_dataset.push_back(std::move(t));
    }

    const std::size_t total = faithful + corrupted;
    // Spread the corrupted images evenly: image k is corrupted when its
    // running share falls behind.
    std::size_t placed = 0;
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < total; ++k) {
        const bool bad = (k + 1) * corrupted / total > placed;
        if (bad) ++placed;
        const QaType type = kAllQaTypes[k % kAllQaTypes.size()];
        const std::string image = "unlabeled/img" + std::to_string(k) + ".jpg";
        std::string q, a, bad_q, bad_a;
        switch (type) {
            case QaType::VQA:
                q = "What color is the " + g.word() + " in picture " + std::to_string(k) + "?";
                a = "blue";
                bad_q = "How many windows are there?";
                bad_a = "seven";
                break;
            case QaType::VisualChat:
                q = "Describe everything happening in picture " + std::to_string(k) + ".";
                a = g.sentence(30, 40);
                bad_q = "What is the weather like?";
                bad_a = "It is raining heavily over the harbor while fishermen haul nets onto wooden boats and gulls "
                        "circle overhead looking for scraps near the old lighthouse pier today.";
                break;
            case QaType::Region:
                q = std::string(kBoxPrompt) + " the " + g.word() + " on the left.";
                a = "[0.1, 0.2, 0.4, 0.5]";
                bad_q = "Where is the exit?";
                bad_a = "[0.6, 0.6, 0.9, 0.95]";
                break;
            case QaType::Caption:
                q = kCaptionPrompt;
                a = "A " + g.words(6) + " near the " + g.word() + ".";
                bad_q = "Caption it.";
                bad_a = "Quiet harbor evening with fishing boats.";
                break;
            case QaType::Choice:
                q = "Which animal is shown? A. cat B. dog C. bird " + std::string(kOptionLetter);
                a = "A";
                bad_q = "Pick one.";
                bad_a = "C";
                break;
        }
        nlohmann::ordered_json e;
        e["image"] = image;
        e["generate"] = "Instruction: " + q + " Answer: " + a;
        e["type"] = std::string(to_string(type));
        e["answer"] = bad ? bad_a : a;
        e["question"] = "Instruction: " + (bad ? bad_q : q);
        entries.push_back(std::move(e));
        f.images.push_back(image);
        f.faithful.push_back(!bad);
        f.types.push_back(type);
    }
    nlohmann::ordered_json root;
    root["entries"] = std::move(entries);
    f.model_table_json = root.dump(2);
    return f;
}

Vector OneHotProvider::one_hot(const std::string& token) {
    auto [it, inserted] = ids_.try_emplace(token, ids_.size());
    Vector v(dim_, 0.0);
    v[it->second % dim_] = 1.0;
    return v;
}

Vector OneHotProvider::sentence_vector(std::string_view text) {
    const auto toks = tokenize(text);
    if (toks.empty()) return Vector(dim_, 0.0);
    return one_hot(toks.front());
}

std::vector<Vector> OneHotProvider::token_vectors(std::string_view text) {
    std::vector<Vector> out;
    for (const auto& t : tokenize(text)) out.push_back(one_hot(t));
    return out;
}

}  // namespace tricon::fixtures
