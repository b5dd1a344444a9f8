#pragma once

// CSV and JSON serialization of profiles, field checkpoints and glyphs.

#include "ldg/field_solver.hpp"
#include "ldg/perturbation.hpp"
#include "ldg/radial.hpp"

#include <json.hpp>

#include <string>

namespace ldg {

/// Header line "# k=.. R=.. N=.. a2=.. ..." followed by r,w0,..,w4 rows.
void write_profile_csv(const std::string& path, const RadialProfile& p, const MaterialParams& params);
/// Throws std::runtime_error on malformed input.
RadialProfile read_profile_csv(const std::string& path, MaterialParams* params = nullptr);

void write_perturbation_csv(const std::string& path, const PerturbationProfile& p, const MaterialParams& params);

/// Checkpoint: header with k, R, parameters and counts, then a node block
/// (x, y, boundary flag, Q11, Q12, Q13, Q22, Q23, Q33) and a triangle block.
/// Q33 is redundant and lets a reader detect a corrupted trace.
void write_field_checkpoint(const std::string& path, const Field2D& f);

struct CheckpointData {
  Field2D field;
  std::vector<Mat3> raw;  // tensors exactly as stored, before projection
};

/// Reads the mesh and the raw tensors; the field holds their symmetric
/// traceless projections. Throws std::runtime_error on malformed input.
CheckpointData read_field_checkpoint(const std::string& path);

struct CheckReport {
  bool ok = true;
  std::vector<std::string> failures;
  nlohmann::json summary;
};

/// Invariant suite on a loaded checkpoint: symmetry, trace and finiteness of
/// the stored tensors, boundary data, biaxiality range, mesh validity.
CheckReport check_checkpoint(const CheckpointData& c, double tol = 1e-9);

/// x, y, beta, eigenvalues l1..l3, then eigenvector columns.
void write_glyph_csv(const std::string& path, const std::vector<Glyph>& glyphs);
/// x, y, beta at every node.
void write_beta_csv(const std::string& path, const Field2D& f);

nlohmann::json params_json(const MaterialParams& p);
MaterialParams params_from_json(const nlohmann::json& j, MaterialParams base = {});

/// Writes `body` with added "version" and "timestamp" fields.
void write_manifest(const std::string& path, nlohmann::json body);

std::string code_version();

}  // namespace ldg
