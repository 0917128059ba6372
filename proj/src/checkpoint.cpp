// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0

#include "hifinet/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hifinet {

namespace {

constexpr char kMagic[4] = {'H', 'F', 'N', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

void write_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64(out, bits);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) throw LoadError("checkpoint: truncated u32");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw LoadError("checkpoint: truncated u64");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

double read_f64(std::istream& in) {
  const std::uint64_t bits = read_u64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_checkpoint(const RunArtifact& artifact, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write checkpoint '" + path + "'");
  out.write(kMagic, 4);
  write_u32(out, kVersion);

  nlohmann::json meta;
  meta["seed"] = artifact.seed;
  meta["data_dir"] = artifact.data_dir;
  meta["config"] = nlohmann::json::parse(artifact.config_json);
  const std::string meta_str = meta.dump();
  write_u64(out, meta_str.size());
  out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));

  write_u64(out, artifact.params.count());
  for (const auto& [name, value] : artifact.params.all()) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u64(out, static_cast<std::uint64_t>(value.rows()));
    write_u64(out, static_cast<std::uint64_t>(value.cols()));
    for (double v : value.data()) write_f64(out, v);
  }
  if (!out) throw LoadError("checkpoint write to '" + path + "' failed");
}

RunArtifact load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw LoadError("checkpoint '" + path + "' has a bad magic header");
  }
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw LoadError("checkpoint version " + std::to_string(version) + " unsupported");
  }

  RunArtifact artifact;
  const std::uint64_t meta_len = read_u64(in);
  std::string meta(meta_len, '\0');
  in.read(meta.data(), static_cast<std::streamsize>(meta_len));
  if (!in) throw LoadError("checkpoint: truncated metadata");

  try {
    const nlohmann::json parsed = nlohmann::json::parse(meta);
    artifact.seed = parsed.at("seed").get<std::uint64_t>();
    artifact.data_dir = parsed.at("data_dir").get<std::string>();
    artifact.config_json = parsed.at("config").dump();
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("checkpoint: bad metadata block: ") + e.what());
  }

  const std::uint64_t n_params = read_u64(in);
  for (std::uint64_t p = 0; p < n_params; ++p) {
    const std::uint32_t name_len = read_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw LoadError("checkpoint: truncated parameter name");
    const auto rows = static_cast<int>(read_u64(in));
    const auto cols = static_cast<int>(read_u64(in));
    Matrix value(rows, cols);
    for (double& v : value.data()) v = read_f64(in);
    artifact.params.add(name, std::move(value));
  }
  return artifact;
}

void write_embeddings_csv(const Matrix& embeddings, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write embeddings '" + path + "'");
  out << "segment_id";
  for (int j = 0; j < embeddings.cols(); ++j) out << ",e" << j;
  out << "\n";
  out.precision(17);
  for (int i = 0; i < embeddings.rows(); ++i) {
    out << i;
    for (int j = 0; j < embeddings.cols(); ++j) out << "," << embeddings(i, j);
    out << "\n";
  }
}

Matrix read_embeddings_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open embeddings '" + path + "'");
  std::string header;
  if (!std::getline(in, header)) throw LoadError("embeddings '" + path + "' is empty");
  int cols = -1;  // count commas in the header: segment_id,e0,...
  for (char c : header) cols += c == ',' ? 1 : 0;
  if (cols < 1) throw LoadError("embeddings '" + path + "' has no feature columns");

  std::vector<double> values;
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    if (!std::getline(ss, cell, ',')) throw LoadError("embeddings: bad row");
    int got = 0;
    while (std::getline(ss, cell, ',')) {
      values.push_back(std::stod(cell));
      ++got;
    }
    if (got != cols) {
      throw LoadError("embeddings row " + std::to_string(rows) + " has " +
                      std::to_string(got) + " values, expected " + std::to_string(cols));
    }
    ++rows;
  }
  return Matrix(rows, cols, std::move(values));
}

}  // namespace hifinet
