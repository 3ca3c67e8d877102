#pragma once

#include <string>
#include <vector>

#include "ci/iteration.hpp"

namespace ci {

/// A snapshot directory holds manifest.json (the recipe: seed and stage parameters, plus
/// hexfloat probe values of all five fields) and a sampled grid file per field.
/// Fields are rebuilt from the recipe; the probes must then match bit for bit.
struct SnapshotOptions {
  int grid_n = 9;
  size_t probes = 8;
};

void write_snapshot(const std::string& dir, const IterationState& st, const SnapshotOptions& o = {});
/// Throws ConfigError on missing or malformed files, AuditError when the rebuilt probes differ.
IterationState read_snapshot(const std::string& dir);

/// Hexfloat text of a double and its inverse (throws ConfigError).
std::string hexfloat(double x);
double parse_hexfloat(const std::string& s);

/// Names "v", "p", "theta", "R", "f"; throws ConfigError on others.
const WaveField& field_by_name(const Quintuple& q, const std::string& name);

/// t = const slice on an n x n grid over [-s, s]^2, s = support radius.
/// Rows `t,x1,x2,c0[,c1,c2]` after a header line.
void write_slice_csv(const std::string& path, const WaveField& f, double t, int n);

/// Writes norms.csv (header plus one line per row).
void write_norms_csv(const std::string& path, const std::vector<DiagnosticsRow>& rows);
/// Reads norms.csv; a wrong header throws ConfigError naming the column.
std::vector<DiagnosticsRow> read_norms_csv(const std::string& path);

}  // namespace ci
