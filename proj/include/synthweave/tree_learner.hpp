#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "synthweave/dataset.hpp"

namespace synthweave::metrics {

/// CART hyperparameters. Defaults are fixed so benchmark results are
/// reproducible without tuning.
struct TreeParams {
    std::size_t max_depth = 8;
    std::size_t min_leaf = 5;
};

/// Deterministic CART: Gini impurity for classification targets,
/// variance reduction for regression. Numeric features split at midpoints
/// between consecutive distinct values, categorical features on
/// one-vs-rest equality; missing feature values always route to the
/// "else" child. Ties between candidate splits break to the first in
/// (feature, threshold/category) scan order.
class DecisionTree {
  public:
    /// Trains on `data` predicting `target_col`. Rows with a missing
    /// target are ignored. Classification when the target column is
    /// categorical, regression when numeric.
    static DecisionTree train(const Table& data, std::size_t target_col,
                              const TreeParams& params = {});

    /// Regression: numeric cell. Classification: category id in the
    /// training table's target dictionary.
    Cell predict(const Row& row) const;

    bool is_classifier() const { return classifier_; }

  private:
    struct Node {
        // split
        std::size_t feature = 0;
        bool categorical_split = false;
        double threshold = 0.0;   // numeric: go left iff value <= threshold
        std::int32_t category = -1;  // categorical: go left iff value == category
        std::unique_ptr<Node> left, right;
        // leaf payload
        Cell value;

        bool is_leaf() const { return !left; }
    };

    std::unique_ptr<Node> root_;
    bool classifier_ = false;

    friend struct TreeBuilder;
};

}  // namespace synthweave::metrics
