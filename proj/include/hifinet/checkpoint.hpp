// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0
//
// Versioned binary checkpoint: magic header, JSON metadata block (config
// echo, seed, data path), then named parameter records with raw
// little-endian 64-bit values. Round-trips bit-exactly.

#pragma once

#include <cstdint>
#include <string>

#include "hifinet/tape.hpp"

namespace hifinet {

struct RunArtifact {
  std::string config_json;
  std::uint64_t seed = 0;
  std::string data_dir;
  ParamStore params;
};

void save_checkpoint(const RunArtifact& artifact, const std::string& path);
RunArtifact load_checkpoint(const std::string& path);

/// Embeddings CSV: header segment_id,e0,...,e{d-1}; 17 significant digits.
void write_embeddings_csv(const Matrix& embeddings, const std::string& path);
Matrix read_embeddings_csv(const std::string& path);

}  // namespace hifinet
