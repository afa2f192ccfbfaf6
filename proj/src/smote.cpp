#include "driveframe/smote.hpp"

#include "driveframe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace driveframe {

void TrainConfig::validate() const {
    if (max_depth < 1) throw ValidationError("train: max_depth must be >= 1");
    if (min_samples_leaf < 1) throw ValidationError("train: min_samples_leaf must be >= 1");
    if (smote_k < 1) throw ValidationError("train: smote_k must be >= 1");
}

Standardization Standardization::fit(const LabeledDataset& data) {
    Standardization st;
    st.stds.fill(1.0);
    if (data.rows.empty()) return st;
    const double n = static_cast<double>(data.rows.size());
    for (const auto& [f, label] : data.rows) {
        auto a = f.as_array();
        for (std::size_t i = 0; i < kFeatureCount; ++i) st.means[i] += a[i];
    }
    for (std::size_t i = 0; i < kFeatureCount; ++i) st.means[i] /= n;
    std::array<double, kFeatureCount> var{};
    for (const auto& [f, label] : data.rows) {
        auto a = f.as_array();
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            double d = a[i] - st.means[i];
            var[i] += d * d;
        }
    }
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        double s = std::sqrt(var[i] / n);
        st.stds[i] = s > 0.0 ? s : 1.0;
    }
    return st;
}

namespace {

// Shortest signed distance from a to b around the 24-hour circle, in (-12, 12].
double hour_delta(double a, double b) {
    double d = std::fmod(b - a, 24.0);
    if (d <= -12.0) d += 24.0;
    if (d > 12.0) d -= 24.0;
    return d;
}

double wrap24(double h) {
    h = std::fmod(h, 24.0);
    if (h < 0.0) h += 24.0;
    return h;
}

} // namespace

double feature_distance(const TripFeatures& a, const TripFeatures& b,
                        const Standardization& st) {
    auto va = a.as_array(), vb = b.as_array();
    double sum = 0.0;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        double d = (i == 0) ? hour_delta(va[i], vb[i]) : vb[i] - va[i];
        d /= st.stds[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

LabeledDataset smote_balance(const LabeledDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.rows.empty())
        throw ValidationError("smote: dataset is empty");

    std::size_t n_influenced = 0, n_sober = 0;
    for (const auto& [f, label] : data.rows)
        (label == Label::Influenced ? n_influenced : n_sober)++;
    if (n_influenced == 0 || n_sober == 0)
        throw ValidationError("smote: both classes must be present");
    if (n_influenced == n_sober) return data;

    const Label minority = n_influenced < n_sober ? Label::Influenced : Label::Sober;
    const std::size_t n_min = std::min(n_influenced, n_sober);
    const std::size_t needed = std::max(n_influenced, n_sober) - n_min;
    if (n_min < 2)
        throw ValidationError("smote: cannot oversample a minority class of size 1");

    std::vector<TripFeatures> min_rows;
    for (const auto& [f, label] : data.rows)
        if (label == minority) min_rows.push_back(f);

    const Standardization st = Standardization::fit(data);

    // k nearest minority neighbours of each minority row, by standardized
    // distance, ties broken by row order.
    const std::size_t k = std::min<std::size_t>(cfg.smote_k, n_min - 1);
    std::vector<std::vector<std::size_t>> neighbours(n_min);
    for (std::size_t i = 0; i < n_min; ++i) {
        std::vector<std::pair<double, std::size_t>> dist;
        for (std::size_t j = 0; j < n_min; ++j) {
            if (j == i) continue;
            dist.emplace_back(feature_distance(min_rows[i], min_rows[j], st), j);
        }
        std::stable_sort(dist.begin(), dist.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t t = 0; t < k; ++t) neighbours[i].push_back(dist[t].second);
    }

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    LabeledDataset out = data;
    for (std::size_t s = 0; s < needed; ++s) {
        const std::size_t base = s % n_min;
        const std::size_t nn =
            neighbours[base][std::uniform_int_distribution<std::size_t>(0, k - 1)(rng)];
        const double u = unit(rng);

        auto a = min_rows[base].as_array();
        auto b = min_rows[nn].as_array();
        std::array<double, kFeatureCount> synth{};
        synth[0] = wrap24(a[0] + u * hour_delta(a[0], b[0]));
        for (std::size_t i = 1; i < kFeatureCount; ++i)
            synth[i] = a[i] + u * (b[i] - a[i]);
        out.rows.emplace_back(TripFeatures::from_array(synth), minority);
    }
    return out;
}

} // namespace driveframe
