#pragma once

#include <span>
#include <string>
#include <vector>

namespace authorship {

// Documents x classes table of class probabilities, row-major.
struct PredictionMatrix {
  std::vector<std::string> doc_ids;
  std::vector<std::string> class_order;
  std::vector<double> values;

  PredictionMatrix() = default;
  PredictionMatrix(std::vector<std::string> ids, std::vector<std::string> classes)
      : doc_ids(std::move(ids)), class_order(std::move(classes)), values(doc_ids.size() * class_order.size(), 0.0) {}

  std::size_t rows() const { return doc_ids.size(); }
  std::size_t cols() const { return class_order.size(); }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols(), cols()}; }
  std::span<double> row(std::size_t r) { return {values.data() + r * cols(), cols()}; }

  // Highest-probability class; ties go to the lowest index.
  std::size_t argmax(std::size_t r) const {
    const auto v = row(r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < v.size(); ++c) {
      if (v[c] > v[best]) best = c;
    }
    return best;
  }

  bool operator==(const PredictionMatrix&) const = default;
};

}  // namespace authorship
