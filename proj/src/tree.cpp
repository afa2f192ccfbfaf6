#include "driveframe/tree.hpp"

#include "driveframe/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace driveframe {

namespace {

double gini(std::size_t c0, std::size_t c1) {
    const double n = static_cast<double>(c0 + c1);
    if (n == 0.0) return 0.0;
    const double p0 = static_cast<double>(c0) / n;
    const double p1 = static_cast<double>(c1) / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

Label majority(std::size_t n_sober, std::size_t n_influenced) {
    // Tie goes to Influenced: a false negative is the costly error here.
    return n_influenced >= n_sober ? Label::Influenced : Label::Sober;
}

struct BestSplit {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;
};

} // namespace

double gini_decrease(std::size_t parent_sober, std::size_t parent_influenced,
                     std::size_t left_sober, std::size_t left_influenced) {
    const std::size_t n = parent_sober + parent_influenced;
    const std::size_t nl = left_sober + left_influenced;
    const std::size_t nr = n - nl;
    const std::size_t right_sober = parent_sober - left_sober;
    const std::size_t right_influenced = parent_influenced - left_influenced;
    const double wl = static_cast<double>(nl) / static_cast<double>(n);
    const double wr = static_cast<double>(nr) / static_cast<double>(n);
    return gini(parent_sober, parent_influenced) -
           wl * gini(left_sober, left_influenced) -
           wr * gini(right_sober, right_influenced);
}

namespace {

BestSplit find_best_split(const LabeledDataset& data, const std::vector<std::size_t>& idx,
                          const TrainConfig& cfg) {
    std::size_t parent_sober = 0, parent_influenced = 0;
    for (std::size_t r : idx)
        (data.rows[r].second == Label::Sober ? parent_sober : parent_influenced)++;

    BestSplit best;
    const std::size_t min_leaf = static_cast<std::size_t>(cfg.min_samples_leaf);

    for (std::size_t feat = 0; feat < kFeatureCount; ++feat) {
        std::vector<std::pair<double, Label>> vals;
        vals.reserve(idx.size());
        for (std::size_t r : idx)
            vals.emplace_back(data.rows[r].first.as_array()[feat], data.rows[r].second);
        std::sort(vals.begin(), vals.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        std::size_t left_sober = 0, left_influenced = 0;
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            (vals[i].second == Label::Sober ? left_sober : left_influenced)++;
            if (vals[i].first == vals[i + 1].first) continue;
            const std::size_t nl = i + 1;
            const std::size_t nr = vals.size() - nl;
            if (nl < min_leaf || nr < min_leaf) continue;
            const double threshold = (vals[i].first + vals[i + 1].first) / 2.0;
            const double dec =
                gini_decrease(parent_sober, parent_influenced, left_sober, left_influenced);
            if (dec <= 0.0) continue;
            // Strict improvement required, so the first candidate in
            // (feature asc, threshold asc) order wins ties.
            if (!best.found || dec > best.decrease) {
                best = {true, static_cast<int>(feat), threshold, dec};
            }
        }
    }
    return best;
}

int build_node(const LabeledDataset& data, std::vector<std::size_t>&& idx, int depth,
               const TrainConfig& cfg, std::vector<TreeNode>& nodes) {
    std::size_t n_sober = 0, n_influenced = 0;
    for (std::size_t r : idx)
        (data.rows[r].second == Label::Sober ? n_sober : n_influenced)++;

    const int self = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[self].class_counts = {n_sober, n_influenced};

    BestSplit best;
    if (depth < cfg.max_depth && n_sober > 0 && n_influenced > 0)
        best = find_best_split(data, idx, cfg);

    if (!best.found) {
        nodes[self].is_leaf = true;
        nodes[self].label = majority(n_sober, n_influenced);
        return self;
    }

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t r : idx) {
        if (data.rows[r].first.as_array()[static_cast<std::size_t>(best.feature)] <
            best.threshold)
            left_idx.push_back(r);
        else
            right_idx.push_back(r);
    }
    idx.clear();

    nodes[self].is_leaf = false;
    nodes[self].feature = best.feature;
    nodes[self].threshold = best.threshold;
    const int left = build_node(data, std::move(left_idx), depth + 1, cfg, nodes);
    const int right = build_node(data, std::move(right_idx), depth + 1, cfg, nodes);
    nodes[self].left = left;
    nodes[self].right = right;
    return self;
}

} // namespace

void DecisionTreeModel::validate() const {
    if (nodes.empty())
        throw ValidationError("tree: model has no nodes");
    const int n = static_cast<int>(nodes.size());
    for (int i = 0; i < n; ++i) {
        const TreeNode& node = nodes[i];
        if (node.is_leaf) continue;
        if (node.feature < 0 || node.feature >= static_cast<int>(kFeatureCount))
            throw ValidationError("tree: node has bad feature index");
        if (node.left <= i || node.left >= n || node.right <= i || node.right >= n)
            throw ValidationError("tree: dangling or backward child reference");
        if (!std::isfinite(node.threshold))
            throw ValidationError("tree: non-finite threshold");
    }
}

int DecisionTreeModel::depth() const {
    if (nodes.empty()) return 0;
    std::vector<int> depth_of(nodes.size(), 0);
    int max_depth = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].is_leaf) continue;
        depth_of[nodes[i].left] = depth_of[i] + 1;
        depth_of[nodes[i].right] = depth_of[i] + 1;
        max_depth = std::max(max_depth, depth_of[i] + 1);
    }
    return max_depth;
}

DecisionTreeModel train_tree(const LabeledDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.rows.empty())
        throw ValidationError("tree: cannot train on an empty dataset");

    DecisionTreeModel model;
    model.train_config = cfg;
    model.standardization = Standardization::fit(data);

    std::vector<std::size_t> idx(data.rows.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    build_node(data, std::move(idx), 0, cfg, model.nodes);
    return model;
}

Prediction predict(const DecisionTreeModel& model, const TripFeatures& f) {
    if (model.nodes.empty())
        throw ValidationError("tree: model has no nodes");
    const auto vals = f.as_array();
    Prediction out;
    int i = 0;
    const int n = static_cast<int>(model.nodes.size());
    while (true) {
        const TreeNode& node = model.nodes[i];
        if (node.is_leaf) {
            out.label = node.label;
            out.leaf_counts = node.class_counts;
            return out;
        }
        if (node.feature < 0 || node.feature >= static_cast<int>(kFeatureCount) ||
            node.left <= i || node.left >= n || node.right <= i || node.right >= n)
            throw ValidationError("tree: model integrity violation at node " +
                                  std::to_string(i));
        const double v = vals[static_cast<std::size_t>(node.feature)];
        const bool goes_right = v >= node.threshold;
        out.path.push_back({kFeatureNames[static_cast<std::size_t>(node.feature)],
                            goes_right ? ">=" : "<", node.threshold});
        i = goes_right ? node.right : node.left;
    }
}

std::string save_model(const DecisionTreeModel& model) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : model.nodes) {
        if (n.is_leaf) {
            nodes.push_back({{"leaf",
                              {{"class", to_string(n.label)},
                               {"counts", {n.class_counts[0], n.class_counts[1]}}}}});
        } else {
            nodes.push_back({{"split",
                              {{"feature", n.feature},
                               {"threshold", n.threshold},
                               {"left", n.left},
                               {"right", n.right},
                               {"counts", {n.class_counts[0], n.class_counts[1]}}}}});
        }
    }
    nlohmann::json j{
        {"version", kModelFormatVersion},
        {"feature_names", kFeatureNames},
        {"standardization",
         {{"means", model.standardization.means}, {"stds", model.standardization.stds}}},
        {"nodes", nodes},
        {"train_config",
         {{"max_depth", model.train_config.max_depth},
          {"min_samples_leaf", model.train_config.min_samples_leaf},
          {"smote_k", model.train_config.smote_k}}},
        {"seed", model.train_config.seed},
    };
    return j.dump(2) + "\n";
}

DecisionTreeModel load_model(const std::string& bytes) {
    nlohmann::json j = nlohmann::json::parse(bytes, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ValidationError("tree: model file is not valid JSON");
    try {
        if (!j.at("version").is_number_integer())
            throw ValidationError("tree: model version must be an integer");
        const int version = j.at("version").get<int>();
        if (version != kModelFormatVersion)
            throw ValidationError("tree: unsupported model format version " +
                                  std::to_string(version));

        DecisionTreeModel model;
        const auto& st = j.at("standardization");
        model.standardization.means = st.at("means").get<std::array<double, kFeatureCount>>();
        model.standardization.stds = st.at("stds").get<std::array<double, kFeatureCount>>();
        const auto& tc = j.at("train_config");
        model.train_config.max_depth = tc.at("max_depth").get<int>();
        model.train_config.min_samples_leaf = tc.at("min_samples_leaf").get<int>();
        model.train_config.smote_k = tc.at("smote_k").get<int>();
        model.train_config.seed = j.at("seed").get<std::uint64_t>();

        for (const auto& nj : j.at("nodes")) {
            TreeNode n;
            if (nj.contains("leaf")) {
                const auto& leaf = nj.at("leaf");
                n.is_leaf = true;
                n.label = label_from_string(leaf.at("class").get<std::string>());
                auto counts = leaf.at("counts").get<std::array<std::size_t, 2>>();
                n.class_counts = counts;
            } else if (nj.contains("split")) {
                const auto& split = nj.at("split");
                n.is_leaf = false;
                n.feature = split.at("feature").get<int>();
                n.threshold = split.at("threshold").get<double>();
                n.left = split.at("left").get<int>();
                n.right = split.at("right").get<int>();
                auto counts = split.at("counts").get<std::array<std::size_t, 2>>();
                n.class_counts = counts;
            } else {
                throw ValidationError("tree: node is neither leaf nor split");
            }
            model.nodes.push_back(n);
        }
        model.validate();
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("tree: model schema violation: ") + e.what());
    }
}

} // namespace driveframe
