#include "helpneed/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "helpneed/errors.hpp"

namespace helpneed {

using nlohmann::json;

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<std::string> state_free_names() {
    const auto& all = feature_names();
    return {all.begin() + static_cast<std::ptrdiff_t>(kQualityFeatureCount), all.end()};
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

double mean_defined(const std::vector<double>& v) {
    double s = 0.0;
    int n = 0;
    for (double x : v)
        if (!std::isnan(x)) {
            s += x;
            ++n;
        }
    return n ? s / n : nan();
}

}  // namespace

const char* to_string(Variant v) { return v == Variant::StateBased ? "state_based" : "state_free"; }

Dataset make_dataset(const std::vector<StepSample>& samples, Variant variant,
                     const std::map<std::string, std::string>& student_tags) {
    Dataset d;
    d.features = variant == Variant::StateBased ? feature_names() : state_free_names();
    const std::size_t offset = variant == Variant::StateBased ? 0 : kQualityFeatureCount;
    std::vector<const StepSample*> rows;
    for (const auto& s : samples)
        if (variant == Variant::StateFree || s.row.state_known) rows.push_back(&s);
    d.x = Matrix(rows.size(), d.features.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& v = rows[r]->row.values;
        for (std::size_t c = 0; c < d.features.size(); ++c) d.x.at(r, c) = v[c + offset];
        d.y.push_back(rows[r]->label);
        d.groups.push_back(rows[r]->student);
        auto it = student_tags.find(rows[r]->student);
        d.tags.push_back(it == student_tags.end() ? std::string{} : it->second);
    }
    return d;
}

std::string dataset_csv(const Dataset& d) {
    std::string out = "student";
    for (const auto& f : d.features) out += "," + f;
    out += ",label\n";
    char buf[40];
    for (std::size_t r = 0; r < d.x.rows; ++r) {
        out += d.groups[r];
        for (std::size_t c = 0; c < d.x.cols; ++c) {
            std::snprintf(buf, sizeof buf, ",%.10g", d.x.at(r, c));
            out += buf;
        }
        out += "," + std::to_string(d.y[r]) + "\n";
    }
    return out;
}

json to_json(const PredictorParams& p) {
    return {{"n_trees", p.forest.n_trees},
            {"max_depth", p.forest.max_depth},
            {"min_samples_split", p.forest.min_samples_split},
            {"max_bins", p.forest.max_bins},
            {"features_per_split", p.forest.features_per_split},
            {"min_selected", p.min_selected},
            {"k_folds", p.k_folds},
            {"grid", p.grid},
            {"auc_slack", p.auc_slack}};
}

PredictorParams predictor_params_from_json(const json& j) {
    PredictorParams p;
    for (const auto& [k, v] : j.items()) {
        if (k == "n_trees") p.forest.n_trees = v.get<int>();
        else if (k == "max_depth") p.forest.max_depth = v.get<int>();
        else if (k == "min_samples_split") p.forest.min_samples_split = v.get<int>();
        else if (k == "max_bins") p.forest.max_bins = v.get<int>();
        else if (k == "features_per_split") p.forest.features_per_split = v.get<int>();
        else if (k == "min_selected") p.min_selected = v.get<std::size_t>();
        else if (k == "k_folds") p.k_folds = v.get<int>();
        else if (k == "grid") p.grid = v.get<std::vector<double>>();
        else if (k == "auc_slack") p.auc_slack = v.get<double>();
        else throw ConfigError("unknown predictor key: " + k);
    }
    if (p.k_folds < 2) throw ConfigError("k_folds must be at least 2");
    if (p.grid.empty()) throw ConfigError("grid must not be empty");
    return p;
}

std::vector<std::size_t> select_by_importance(const std::vector<double>& importances, std::size_t min_keep) {
    const std::size_t d = importances.size();
    double mean = d ? std::accumulate(importances.begin(), importances.end(), 0.0) / static_cast<double>(d) : 0.0;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < d; ++i)
        if (importances[i] >= mean && importances[i] > 0) keep.push_back(i);
    if (keep.size() < std::min(min_keep, d)) {
        std::vector<std::size_t> order(d);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return importances[a] > importances[b]; });
        keep.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(min_keep, d)));
        std::sort(keep.begin(), keep.end());
    }
    return keep;
}

Selection select_features(const Dataset& train, const PredictorParams& params, std::uint64_t seed) {
    Selection sel;
    sel.normalizer = Normalizer::fit(train.x);
    sel.automated = automated_weights(train.y);
    Matrix nx = sel.normalizer.apply(train.x);
    auto prelim = RandomForest::train(nx, train.y, params.forest, sel.automated, splitmix(seed ^ 0x5e1ec7ULL));
    sel.selected = select_by_importance(prelim.importances(), params.min_selected);
    return sel;
}

HelpNeedModel train_with_selection(const Dataset& train, const Selection& sel, Variant variant,
                                   const PredictorParams& params, double multiplier, std::uint64_t seed) {
    HelpNeedModel m;
    m.variant = variant;
    m.manifest = train.features;
    m.selected = sel.selected;
    for (std::size_t c : sel.selected) {
        m.normalizer.mean.push_back(sel.normalizer.mean[c]);
        m.normalizer.sd.push_back(sel.normalizer.sd[c]);
    }
    m.weights = {sel.automated.w0, sel.automated.w1 * multiplier};
    m.multiplier = multiplier;
    m.seed = seed;
    Matrix xs = m.normalizer.apply(train.x.select_cols(sel.selected));
    m.forest = RandomForest::train(xs, train.y, params.forest, m.weights, seed);
    return m;
}

HelpNeedModel train_model(const Dataset& train, Variant variant, const PredictorParams& params, double multiplier,
                          std::uint64_t seed) {
    return train_with_selection(train, select_features(train, params, seed), variant, params, multiplier, seed);
}

double HelpNeedModel::predict_proba(const std::vector<double>& row) const {
    if (row.size() != manifest.size())
        throw ManifestMismatch("model expects " + std::to_string(manifest.size()) + " features, got " +
                               std::to_string(row.size()));
    std::vector<double> sub;
    sub.reserve(selected.size());
    for (std::size_t c : selected) sub.push_back(row[c]);
    return forest.predict_proba(normalizer.apply(sub));
}

json to_json(const HelpNeedModel& m) {
    return {{"format", "helpneed-model"},
            {"version", 1},
            {"variant", to_string(m.variant)},
            {"manifest", m.manifest},
            {"selected", m.selected},
            {"normalizer", {{"mean", m.normalizer.mean}, {"sd", m.normalizer.sd}}},
            {"weights", {{"w0", m.weights.w0}, {"w1", m.weights.w1}}},
            {"multiplier", m.multiplier},
            {"seed", m.seed},
            {"forest", m.forest.to_json()}};
}

HelpNeedModel model_from_json(const json& j) {
    if (!j.is_object() || j.value("format", "") != "helpneed-model" || j.value("version", 0) != 1)
        throw ValidationError("not a version-1 helpneed model file");
    HelpNeedModel m;
    try {
        std::string v = j.at("variant").get<std::string>();
        if (v != "state_based" && v != "state_free") throw ValidationError("model file: unknown variant " + v);
        m.variant = v == "state_based" ? Variant::StateBased : Variant::StateFree;
        m.manifest = j.at("manifest").get<std::vector<std::string>>();
        m.selected = j.at("selected").get<std::vector<std::size_t>>();
        m.normalizer.mean = j.at("normalizer").at("mean").get<std::vector<double>>();
        m.normalizer.sd = j.at("normalizer").at("sd").get<std::vector<double>>();
        m.weights = {j.at("weights").at("w0").get<double>(), j.at("weights").at("w1").get<double>()};
        m.multiplier = j.at("multiplier").get<double>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.forest = RandomForest::from_json(j.at("forest"));
    } catch (const json::exception& e) {
        throw ValidationError(std::string("model file: ") + e.what());
    }
    for (std::size_t c : m.selected)
        if (c >= m.manifest.size()) throw ValidationError("model file: selected column outside manifest");
    if (m.normalizer.mean.size() != m.selected.size() || m.normalizer.sd.size() != m.selected.size() ||
        m.forest.n_features() != m.selected.size())
        throw ValidationError("model file: selected features, normalizer and forest disagree");
    return m;
}

void save_model(const HelpNeedModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << to_json(m).dump() << '\n';
}

HelpNeedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return model_from_json(j);
}

StepPrediction predict_step(const PredictorPair& models, const std::vector<double>& row, bool state_known) {
    if (row.size() != feature_names().size()) throw ManifestMismatch("feature row does not match the full manifest");
    if (models.state_based.manifest != feature_names() || models.state_free.manifest != state_free_names())
        throw ManifestMismatch("model manifests do not match the feature extractor");
    StepPrediction p;
    if (state_known) {
        p.used = Variant::StateBased;
        p.probability = models.state_based.predict_proba(row);
    } else {
        p.used = Variant::StateFree;
        std::vector<double> sub(row.begin() + static_cast<std::ptrdiff_t>(kQualityFeatureCount), row.end());
        p.probability = models.state_free.predict_proba(sub);
    }
    p.label = p.probability >= 0.5 ? 1 : 0;
    return p;
}

json to_json(const CVReport& r) {
    json folds = json::array();
    for (const auto& f : r.folds) {
        folds.push_back({{"recall", std::isnan(f.recall) ? json(nullptr) : json(f.recall)},
                         {"auc", std::isnan(f.auc) ? json(nullptr) : json(f.auc)},
                         {"n_test", f.n_test},
                         {"positives", f.positives}});
    }
    return {{"variant", to_string(r.variant)},
            {"multiplier", r.multiplier},
            {"mean_recall", r.mean_recall},
            {"mean_auc", r.mean_auc},
            {"folds", folds},
            {"fold_of_group", r.fold_of_group},
            {"leakage_violations", r.leakage_violations}};
}

std::map<std::string, int> assign_folds(const Dataset& d, int k, std::uint64_t seed) {
    std::map<std::string, std::pair<double, double>> stats;  // positives, total
    for (std::size_t i = 0; i < d.groups.size(); ++i) {
        auto& s = stats[d.groups[i]];
        s.first += d.y[i];
        s.second += 1;
    }
    if (static_cast<int>(stats.size()) < k)
        throw TooFewGroups("need at least " + std::to_string(k) + " students, have " + std::to_string(stats.size()));
    struct G {
        std::string id;
        double rate;
        std::uint64_t tie;
    };
    std::vector<G> gs;
    for (const auto& [id, s] : stats) gs.push_back({id, s.first / s.second, splitmix(fnv1a(id) ^ seed)});
    std::sort(gs.begin(), gs.end(), [](const G& a, const G& b) {
        if (a.rate != b.rate) return a.rate < b.rate;
        if (a.tie != b.tie) return a.tie < b.tie;
        return a.id < b.id;
    });
    std::map<std::string, int> out;
    for (std::size_t i = 0; i < gs.size(); ++i) out[gs[i].id] = static_cast<int>(i % static_cast<std::size_t>(k));
    return out;
}

std::map<std::string, int> assign_folds_by_tag(const Dataset& d) {
    std::set<std::string> tags(d.tags.begin(), d.tags.end());
    if (tags.size() < 2) throw TooFewGroups("semester split needs at least two corpus tags");
    std::map<std::string, int> tag_index;
    for (const auto& t : tags) tag_index.emplace(t, static_cast<int>(tag_index.size()));
    std::map<std::string, int> out;
    for (std::size_t i = 0; i < d.groups.size(); ++i) {
        int f = tag_index.at(d.tags[i]);
        auto [it, fresh] = out.emplace(d.groups[i], f);
        if (!fresh && it->second != f) throw ValidationError("student " + d.groups[i] + " carries two corpus tags");
    }
    return out;
}

std::vector<CVReport> cross_validate(const Dataset& d, Variant variant, const PredictorParams& params,
                                     const std::vector<double>& multipliers, std::uint64_t seed,
                                     const std::map<std::string, int>& folds) {
    int k = 0;
    for (const auto& [g, f] : folds) k = std::max(k, f + 1);
    std::vector<CVReport> reports(multipliers.size());
    for (std::size_t m = 0; m < multipliers.size(); ++m) {
        reports[m].variant = variant;
        reports[m].multiplier = multipliers[m];
        reports[m].fold_of_group = folds;
    }
    std::vector<std::vector<double>> recalls(multipliers.size()), aucs(multipliers.size());
    for (int f = 0; f < k; ++f) {
        std::vector<std::size_t> tr, te;
        for (std::size_t i = 0; i < d.groups.size(); ++i) (folds.at(d.groups[i]) == f ? te : tr).push_back(i);
        std::set<std::string> train_groups, test_groups;
        for (auto i : tr) train_groups.insert(d.groups[i]);
        for (auto i : te) test_groups.insert(d.groups[i]);
        std::size_t leaks = 0;
        for (const auto& g : test_groups) leaks += train_groups.count(g);

        Dataset train{d.features, d.x.select_rows(tr), {}, {}, {}};
        for (auto i : tr) train.y.push_back(d.y[i]);
        Matrix test_x = d.x.select_rows(te);
        std::vector<int> test_y;
        for (auto i : te) test_y.push_back(d.y[i]);

        std::uint64_t fold_seed = splitmix(seed + static_cast<std::uint64_t>(f));
        Selection sel = select_features(train, params, fold_seed);
        std::size_t pos = static_cast<std::size_t>(std::count(test_y.begin(), test_y.end(), 1));
        bool both = pos > 0 && pos < test_y.size();
        for (std::size_t m = 0; m < multipliers.size(); ++m) {
            HelpNeedModel model = train_with_selection(train, sel, variant, params, multipliers[m], fold_seed);
            std::vector<double> probs;
            std::vector<int> preds;
            for (std::size_t r = 0; r < test_x.rows; ++r) {
                std::vector<double> row(test_x.row(r), test_x.row(r) + test_x.cols);
                double p = model.predict_proba(row);
                probs.push_back(p);
                preds.push_back(p >= 0.5 ? 1 : 0);
            }
            FoldResult fr;
            fr.n_test = te.size();
            fr.positives = pos;
            fr.recall = pos > 0 ? recall(preds, test_y) : nan();
            fr.auc = both ? roc_auc(probs, test_y) : nan();
            reports[m].folds.push_back(fr);
            reports[m].leakage_violations += leaks;
            recalls[m].push_back(fr.recall);
            aucs[m].push_back(fr.auc);
        }
    }
    for (std::size_t m = 0; m < multipliers.size(); ++m) {
        reports[m].mean_recall = mean_defined(recalls[m]);
        reports[m].mean_auc = mean_defined(aucs[m]);
    }
    return reports;
}

CVReport cross_validate(const Dataset& d, Variant variant, const PredictorParams& params, double multiplier,
                        std::uint64_t seed) {
    return cross_validate(d, variant, params, {multiplier}, seed, assign_folds(d, params.k_folds, seed)).front();
}

ExpertSearchResult choose_expert(const std::vector<CVReport>& reports, const std::vector<double>& grid,
                                 ClassWeights automated, double auc_slack) {
    ExpertSearchResult res;
    res.reports = reports;
    double best_auc = -1.0;
    for (const auto& r : reports)
        if (!std::isnan(r.mean_auc)) best_auc = std::max(best_auc, r.mean_auc);
    double best_recall = -1.0;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        if (std::isnan(r.mean_auc) || r.mean_auc < best_auc - auc_slack) continue;
        if (r.mean_recall > best_recall ||
            (r.mean_recall == best_recall && grid[i] < grid[res.chosen])) {
            best_recall = r.mean_recall;
            res.chosen = i;
        }
    }
    res.multiplier = grid[res.chosen];
    res.weights = {automated.w0, automated.w1 * res.multiplier};
    return res;
}

ExpertSearchResult expert_weight_search(const Dataset& d, Variant variant, const PredictorParams& params,
                                        std::uint64_t seed) {
    auto folds = assign_folds(d, params.k_folds, seed);
    auto reports = cross_validate(d, variant, params, params.grid, seed, folds);
    return choose_expert(reports, params.grid, automated_weights(d.y), params.auc_slack);
}

}  // namespace helpneed
