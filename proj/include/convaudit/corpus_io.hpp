#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "convaudit/error.hpp"
#include "convaudit/model_ir.hpp"
#include "convaudit/onnx_reader.hpp"

namespace convaudit {

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AuditError(ErrorKind::MalformedInput, path.string(), "cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Format is chosen by extension. ONNX files take their model id from the
// file stem: exporters routinely give every graph the same name.
inline ModelGraph load_graph_file(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::string bytes = read_file_bytes(path);
  if (ext == ".json") return parse_graph_json(bytes);
  if (ext == ".onnx") return parse_onnx_protobuf(bytes, path.stem().string(), path.stem().string());
  throw AuditError(ErrorKind::MalformedInput, path.string(), "unsupported graph file extension");
}

struct LoadFailure {
  std::string path;
  std::string message;
};

struct CorpusLoad {
  Corpus corpus;
  std::vector<LoadFailure> failures;
};

inline bool is_graph_file(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  return ext == ".json" || ext == ".onnx";
}

// Loads every *.json / *.onnx file directly inside `dir`, in filename order.
// Files that fail to parse are reported, not fatal.
inline CorpusLoad load_corpus_dir(const std::filesystem::path& dir, CorpusRole role) {
  if (!std::filesystem::is_directory(dir)) {
    throw AuditError(ErrorKind::MalformedInput, dir.string(), "not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && is_graph_file(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<ModelGraph> models;
  std::vector<LoadFailure> failures;
  for (const auto& f : files) {
    try {
      models.push_back(load_graph_file(f));
    } catch (const AuditError& e) {
      failures.push_back({f.string(), e.what()});
    }
  }
  return {Corpus(role, std::move(models)), std::move(failures)};
}

}  // namespace convaudit
