#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "vprsnn/assignment.hpp"
#include "vprsnn/config.hpp"
#include "vprsnn/matrix.hpp"

namespace vprsnn {

struct TrainingMetadata
{
    std::size_t epochs_completed = 0;
    std::uint64_t presentations = 0;
    std::uint64_t retries = 0;

    friend bool operator==(const TrainingMetadata&, const TrainingMetadata&) = default;
};

/// Trained network plus the statistics needed to decode queries.
struct Checkpoint
{
    RunConfig config;
    Matrix<double> weights;  ///< n_inputs x n_exc
    std::vector<double> theta;
    SpikeCountMatrix counts;  ///< n_exc x n_labels
    AssignmentTable assignment;
    TrainingMetadata meta;
};

/// On-disk layout:
///
///     "VPRSNN1\n"
///     u64 little-endian: header length in bytes
///     JSON header (config echo, dimensions, assignment, metadata)
///     weights, theta, counts: little-endian IEEE-754 doubles, row-major
std::string serialize_checkpoint(const Checkpoint& ckpt);
/// Throws ValidationError on a bad magic, malformed header or dimension
/// mismatch.
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace vprsnn
