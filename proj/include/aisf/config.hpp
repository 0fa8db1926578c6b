#pragma once

#include <cstdint>
#include <optional>

#include "aisf/errors.hpp"

namespace aisf {

// Free parameters of the model. Every field has a working default; the CLI
// exposes each one as a flag.
struct RunConfig {
    // Contiguous-bit threshold for receptor/peptide binding (bits).
    std::uint32_t r = 12;
    // Macrophage threshold for sender patterns. Unset means the receptor must
    // equal the pattern exactly; a value enables sliding contiguous matching.
    std::optional<std::uint32_t> r_pattern;

    std::uint32_t b_cell_count = 256;
    std::uint32_t helper_t_count = 128;
    std::uint32_t controller_t_count = 128;

    // Initial lifetime L0, in encounters.
    std::uint32_t initial_lifetime = 16;
    // Lifetime reward for cells stimulated during an encounter.
    std::uint32_t reward = 4;
    // Clones added per activated B cell.
    std::uint32_t clone_count = 3;
    // Max peptides recombined into one receptor.
    std::uint32_t k_max = 3;
    // Counter value assigned to offending cells during relearning.
    std::uint32_t reset_value = 0;

    std::uint64_t seed = 1;

    void validate() const {
        if (r < 1) throw ConfigError{"r must be >= 1"};
        if (r_pattern && *r_pattern < 1) throw ConfigError{"r-pattern must be >= 1"};
        if (b_cell_count < 1 || helper_t_count < 1 || controller_t_count < 1)
            throw ConfigError{"population sizes must be >= 1"};
        if (initial_lifetime < 1) throw ConfigError{"initial lifetime must be >= 1"};
        if (k_max < 1) throw ConfigError{"k-max must be >= 1"};
        if (clone_count < 1) throw ConfigError{"clone count must be >= 1"};
    }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

}  // namespace aisf
