#pragma once

#include <vector>

namespace patchant {

// TCSPC histogram: uniform bins starting at bin_start[i], counts as non-negative integers.
struct DecayHistogram {
    std::vector<double> bin_start;
    std::vector<double> counts;
    double bin_width = 0.0;
    double window = 400.0;  // ns; one 2.5 MHz repetition period

    std::size_t size() const noexcept { return counts.size(); }
    double total() const noexcept;
    // Throws ValidationError on negative/non-integer counts or non-uniform bins.
    void validate() const;
};

// Bin starts i * width for i in [0, n).
DecayHistogram make_empty_histogram(double bin_width, double window);

}  // namespace patchant
