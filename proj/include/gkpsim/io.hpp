#pragma once

// Deterministic CSV/JSON export helpers shared by the CLI and tests.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gkpsim/channels.hpp"
#include "gkpsim/optimize.hpp"
#include "gkpsim/simulate.hpp"
#include "gkpsim/tomography.hpp"

namespace gkpsim {

// Locale-independent shortest round-trip formatting of doubles.
std::string format_double(double v);

// One CSV row; fields are written verbatim, so callers pre-format numbers.
using CsvRow = std::vector<std::string>;

// Writes header + rows with '\n' line endings, no trailing spaces.
void write_csv(const std::string& path, const CsvRow& header, const std::vector<CsvRow>& rows);

std::string sha256_file(const std::string& path);

// module-specific exporters
void export_codewords_csv(const std::string& path, const GkpCode& code);
void export_grid_csv(const std::string& path, const PhaseSpaceGrid& grid);
void export_lifetime_csv(const std::string& path, const std::vector<LifetimeCurve>& curves);
void export_budget_csv(const std::string& path, const std::vector<ErrorBudgetEntry>& entries);
void export_sweep_csv(const std::string& path, const std::vector<FidelitySweepRow>& rows);

// optimized circuit save/load (JSON)
void save_circuit_json(const std::string& path, const EcdCircuitParams& params, double fidelity);
EcdCircuitParams load_circuit_json(const std::string& path);

// schedule serialization (JSON step list)
std::string schedule_to_json(const CircuitSchedule& schedule);

// run manifest written beside every CLI output set
void write_manifest(const std::string& path, const std::string& command,
                    const std::map<std::string, std::string>& config,
                    double wall_seconds);

}  // namespace gkpsim
