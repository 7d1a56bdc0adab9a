#include "authorship/interchange.hpp"

#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "authorship/common.hpp"

namespace authorship {

using nlohmann::json;

std::string prediction_to_csv(const PredictionMatrix& matrix) {
  std::vector<std::string> header{"doc_id"};
  header.insert(header.end(), matrix.class_order.begin(), matrix.class_order.end());
  std::string out = csv::join(header) + "\n";
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    std::vector<std::string> fields{matrix.doc_ids[r]};
    for (double v : matrix.row(r)) fields.push_back(format_double(v));
    out += csv::join(fields) + "\n";
  }
  return out;
}

PredictionMatrix prediction_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kEmptyInput, "prediction file is empty");
  auto header = csv::split_line(line);
  if (header.size() < 2 || header[0] != "doc_id") {
    throw Error(ErrorCode::kMalformedRecord, "prediction header must be doc_id,<labels...>");
  }
  PredictionMatrix m;
  m.class_order.assign(header.begin() + 1, header.end());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kMalformedRecord, "line " + std::to_string(line_no) + " has " +
                                                   std::to_string(fields.size()) + " fields, expected " +
                                                   std::to_string(header.size()));
    }
    m.doc_ids.push_back(fields[0]);
    for (std::size_t c = 1; c < fields.size(); ++c) m.values.push_back(parse_double(fields[c]));
  }
  return m;
}

std::string manifest_to_json(const PredictionManifest& manifest) {
  const json j{{"model_id", manifest.model_id},
               {"group", std::string(to_string(manifest.group))},
               {"fold", manifest.fold},
               {"split", manifest.split},
               {"class_order", manifest.class_order}};
  return j.dump(1) + "\n";
}

PredictionManifest manifest_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    PredictionManifest m;
    m.model_id = j.at("model_id").get<std::string>();
    m.group = parse_model_group(j.at("group").get<std::string>());
    m.fold = j.at("fold").get<std::size_t>();
    m.split = j.value("split", std::string("test"));
    m.class_order = j.at("class_order").get<std::vector<std::string>>();
    if (m.model_id.empty()) throw Error(ErrorCode::kMalformedRecord, "empty model_id in manifest");
    if (m.split != "test" && m.split != "validation") {
      throw Error(ErrorCode::kMalformedRecord, "manifest split must be test or validation, got " + m.split);
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("manifest: ") + e.what());
  }
}

std::filesystem::path manifest_path_for(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".json");
  return p;
}

void write_predictions(const std::filesystem::path& csv_path, const PredictionMatrix& matrix,
                       const PredictionManifest& manifest) {
  write_file(csv_path, prediction_to_csv(matrix));
  write_file(manifest_path_for(csv_path), manifest_to_json(manifest));
}

const std::vector<std::string>& split_ids(const FoldAssignment& fold, const std::string& split) {
  if (split == "test") return fold.test;
  if (split == "validation") return fold.validation;
  if (split == "train") return fold.train;
  throw Error(ErrorCode::kInvalidArgument, "unknown split " + split);
}

ImportedPrediction import_prediction(const std::filesystem::path& csv_path, const FoldPlan& plan,
                                     const std::vector<std::string>& class_order, const ImportOptions& options) {
  const std::string bytes = read_file(csv_path);
  const auto where = csv_path.string() + ": ";
  ImportedPrediction out;
  out.source = csv_path;
  out.sha256 = sha256_hex(bytes);
  out.manifest = manifest_from_json(read_file(manifest_path_for(csv_path)));
  const auto& man = out.manifest;
  if (options.group && man.group != *options.group) {
    throw Error(ErrorCode::kInvalidArgument, where + "expected group " + std::string(to_string(*options.group)));
  }
  PredictionMatrix raw = prediction_from_csv(bytes);
  if (raw.class_order != man.class_order) {
    throw Error(ErrorCode::kClassOrderMismatch, where + "CSV header and manifest class_order differ");
  }
  if (raw.class_order != class_order) {
    throw Error(ErrorCode::kClassOrderMismatch, where + "class order does not match the corpus labels");
  }
  if (man.fold >= plan.folds.size()) {
    throw Error(ErrorCode::kDocMismatch, where + "fold " + std::to_string(man.fold) + " is not in the fold plan");
  }
  validate_rows(raw, options.tolerance);

  const auto& expected = split_ids(plan.folds[man.fold], man.split);
  std::map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    if (!row_of.emplace(raw.doc_ids[r], r).second) {
      throw Error(ErrorCode::kDocMismatch, where + "doc_id " + raw.doc_ids[r] + " appears twice");
    }
  }
  for (const auto& id : expected) {
    if (!row_of.count(id)) throw Error(ErrorCode::kDocMismatch, where + "missing doc_id " + id);
  }
  if (row_of.size() != expected.size()) {
    throw Error(ErrorCode::kDocMismatch, where + "rows for documents outside fold " + std::to_string(man.fold) +
                                             " " + man.split);
  }

  PredictionMatrix ordered(expected, raw.class_order);
  for (std::size_t r = 0; r < expected.size(); ++r) {
    const auto src = raw.row(row_of.at(expected[r]));
    std::copy(src.begin(), src.end(), ordered.row(r).begin());
  }
  out.output = ModelOutput{man.model_id, man.group, std::move(ordered)};
  return out;
}

std::vector<ImportedPrediction> import_predictions(const std::vector<std::filesystem::path>& csv_paths,
                                                   const FoldPlan& plan, const std::vector<std::string>& class_order,
                                                   const ImportOptions& options) {
  std::vector<ImportedPrediction> out;
  std::map<std::tuple<std::string, std::size_t, std::string>, std::filesystem::path> seen;
  for (const auto& p : csv_paths) {
    auto imported = import_prediction(p, plan, class_order, options);
    const auto key = std::make_tuple(imported.manifest.model_id, imported.manifest.fold, imported.manifest.split);
    if (!seen.emplace(key, p).second) {
      throw Error(ErrorCode::kDuplicateId, "two files for model " + imported.manifest.model_id + " fold " +
                                               std::to_string(imported.manifest.fold) + " " + imported.manifest.split);
    }
    out.push_back(std::move(imported));
  }
  return out;
}

}  // namespace authorship
