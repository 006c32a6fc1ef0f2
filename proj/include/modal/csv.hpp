#pragma once

#include <string>
#include <vector>

#include "modal/common.hpp"
#include "modal/datagen.hpp"

namespace modal {

// All floating-point text is written at 17 significant digits so values
// round-trip bit-comparably.
std::string format_double(double v);

// dataset CSV: header x1..x{dim},label
void write_dataset_csv(const std::string& path, const LabeledDataset& data);
LabeledDataset read_dataset_csv(const std::string& path);

// samples CSV: header x1..x{dim},requested_label,assigned_label
struct SampleTable {
    std::size_t dim = 0;
    std::vector<Vec> points;
    std::vector<int> requested;
    std::vector<int> assigned;
};

void write_samples_csv(const std::string& path, const SampleTable& table);
SampleTable read_samples_csv(const std::string& path);

void write_loss_curve_csv(const std::string& path,
                          const std::vector<std::pair<long, double>>& curve);

}  // namespace modal
