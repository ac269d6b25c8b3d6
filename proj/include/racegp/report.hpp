#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "racegp/datagen.hpp"
#include "racegp/experiment.hpp"

namespace racegp {

/// One row per record, fixed column order, provenance in '#' comment lines.
std::string records_to_csv(const std::vector<ExperimentRecord>& records, const Provenance& prov);
std::vector<ExperimentRecord> records_from_csv(const std::string& text);
std::vector<ExperimentRecord> read_records_csv(const std::filesystem::path& path);

/// Counts, per-size mean r2 and the kernel ranking when the matrix is complete.
std::string summary_json(const std::vector<ExperimentRecord>& records, const Provenance& prov);

/// Writes <dir>/records.csv, <dir>/summary.json and, for records carrying a
/// prediction series, <dir>/plots/<cell>.csv. Returns the files written.
std::vector<std::filesystem::path> write_report(const std::vector<ExperimentRecord>& records,
                                                const std::filesystem::path& dir,
                                                const Provenance& prov);

}  // namespace racegp
