#pragma once

#include "driveframe/features.hpp"

#include <cstdint>

namespace driveframe {

struct TrainConfig {
    int max_depth = 5;
    int min_samples_leaf = 2;
    int smote_k = 5;
    std::uint64_t seed = 0;

    void validate() const;
};

// Per-feature z-score parameters. Fitted on the full training data and
// stored with the model; used only for SMOTE's neighbour distances, the
// tree itself splits on raw values for interpretability.
struct Standardization {
    std::array<double, kFeatureCount> means{};
    std::array<double, kFeatureCount> stds{};  // zero-variance features get 1

    static Standardization fit(const LabeledDataset& data);
};

// Distance between two feature vectors in standardized space. mean_hour
// differs along the 24-hour circle; the remaining features are linear.
double feature_distance(const TripFeatures& a, const TripFeatures& b,
                        const Standardization& st);

// Synthetic minority oversampling: new rows interpolate between a minority
// row and one of its k nearest minority neighbours. Output has equal class
// counts and is deterministic for a given seed. Balanced input is returned
// unchanged.
LabeledDataset smote_balance(const LabeledDataset& data, const TrainConfig& cfg);

} // namespace driveframe
