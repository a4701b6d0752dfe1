#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "skewerg/diagnostics.hpp"
#include "skewerg/gaussian.hpp"
#include "skewerg/noise.hpp"
#include "skewerg/skew.hpp"
#include "skewerg/spectral.hpp"
#include "skewerg/toeplitz.hpp"

namespace skewerg::report {

using nlohmann::json;

/// {"rows", "cols", "data"} with data row-major.
json matrix(const Eigen::MatrixXd& m);

json to_json(const CovarianceSequence& c);
json to_json(const SzegoResult& r);
json to_json(const QuasiMarkovResult& r);
json to_json(const OffWhiteResult& r);
json to_json(const NoiseClassification& c);
json to_json(const PredictionSolution& s);
json to_json(const InterpolationSolution& s);
json to_json(const ConditionalLaw& law);
json to_json(const SubcouplingSpec& s);
json to_json(const EmpiricalMeasure& m);
json to_json(const BlockLaw& b);
json to_json(const PairedEnsemble& p);
json to_json(const MalliavinReport& r);
json to_json(const StrongFellerReport& r);
json to_json(const IrreducibilityReport& r);
json to_json(const UltraFellerPoint& p);

/// RFC 4180 table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string str() const;
};

/// Shortest round-trip decimal form, '.' separator.
std::string number(double v);

/// "key,value" rows for every leaf of a JSON document, keys as JSON
/// pointers.
CsvTable flatten(const json& doc);

}  // namespace skewerg::report
