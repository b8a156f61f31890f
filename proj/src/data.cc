// Copyright 2026 The vfm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vfm/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "vfm/errors.h"
#include "vfm/rng.h"
#include "vfm/solver.h"

namespace vfm {
namespace {

int NonZeroWeights(const DatasetSpec& spec) {
  // Guard against 0.1 * 800 landing a hair above 80.
  return static_cast<int>(std::ceil(spec.sparsity * spec.d - 1e-9));
}

void CheckSpec(const DatasetSpec& spec) {
  if (spec.n < 1) throw InputError("n must be >= 1");
  if (spec.d < 1) throw InputError("d must be >= 1");
  if (!(spec.sparsity > 0.0 && spec.sparsity <= 1.0)) {
    throw InputError("sparsity must lie in (0, 1]");
  }
  if (spec.sparsity * spec.d < 1.0) {
    throw InputError("sparsity * d must be >= 1 so that w* has a non-zero");
  }
  if (!(spec.label_noise >= 0.0) || !(spec.logit_scale > 0.0)) {
    throw InputError("label noise must be >= 0 and logit scale > 0");
  }
}

}  // namespace

SyntheticData GenSynthetic(const DatasetSpec& spec, TaskKind task) {
  CheckSpec(spec);
  NoiseStream stream(spec.seed, SeedDomain::kData, 0);
  const int d = spec.d;
  const Eigen::Index n = spec.n;

  // Partial Fisher-Yates picks the support of w*.
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  const int nnz = NonZeroWeights(spec);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < nnz; ++i) {
    const int j = i + static_cast<int>(stream.NextBelow(
                          static_cast<std::uint64_t>(d - i)));
    std::swap(order[i], order[j]);
    double value = 0.0;
    while (value == 0.0) value = stream.NextUniform(-1.0, 1.0);
    w[order[i]] = value;
  }

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, d);
  Eigen::VectorXd y(n);
  const double l1 = w.lpNorm<1>();
  const double sd = std::sqrt(w.squaredNorm() * spec.sparsity / 3.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) {
      if (spec.sparsity >= 1.0 || stream.NextUniform() < spec.sparsity) {
        x(i, a) = stream.NextUniform(-1.0, 1.0);
      }
    }
    const double score = x.row(i).dot(w);
    if (task == TaskKind::kLinear) {
      const double noise =
          stream.NextUniform(-spec.label_noise, spec.label_noise);
      y[i] = std::clamp(score / l1 + noise, -1.0, 1.0);
    } else {
      const double p = Sigmoid(spec.logit_scale * score / sd);
      y[i] = stream.NextUniform() < p ? 1.0 : 0.0;
    }
  }
  return {Dataset(task, std::move(x), std::move(y)), std::move(w)};
}

namespace {

std::string Trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

// RFC 4180 style: commas separate, double quotes group, "" is a quote.
std::vector<std::string> SplitCsvLine(const std::string& line,
                                      std::size_t row) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      cells.push_back(was_quoted ? cell : Trim(cell));
      cell.clear();
      was_quoted = false;
    } else {
      cell.push_back(c);
    }
  }
  if (quoted) throw IngestionError("unterminated quote", row, "");
  cells.push_back(was_quoted ? cell : Trim(cell));
  return cells;
}

std::optional<double> ParseNumber(const std::string& s) {
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

bool IsMissing(const std::string& cell) { return cell.empty() || cell == "?"; }

// Less-than that orders numbers numerically and everything else as text.
bool ValueLess(const std::string& a, const std::string& b) {
  const auto na = ParseNumber(a);
  const auto nb = ParseNumber(b);
  if (na && nb) return *na < *nb;
  return a < b;
}

double MinMax(double v, double lo, double hi) {
  return 2.0 * (v - lo) / (hi - lo) - 1.0;
}

}  // namespace

IngestResult IngestCsv(const std::filesystem::path& path,
                       const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) {
    throw IngestionError("missing header row", 0, "");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);
  }
  const std::vector<std::string> header = SplitCsvLine(line, 0);
  const auto label_it =
      std::find(header.begin(), header.end(), options.label_column);
  if (label_it == header.end()) {
    throw IngestionError("label column not found", 0, options.label_column);
  }
  const std::size_t label_col =
      static_cast<std::size_t>(label_it - header.begin());
  const std::size_t cols = header.size();

  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_numbers;
  std::size_t dropped = 0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (Trim(line).empty()) continue;
    std::vector<std::string> cells = SplitCsvLine(line, row);
    if (cells.size() != cols) {
      throw IngestionError("expected " + std::to_string(cols) +
                               " cells, found " + std::to_string(cells.size()),
                           row, "");
    }
    if (std::any_of(cells.begin(), cells.end(), IsMissing)) {
      ++dropped;
      continue;
    }
    rows.push_back(std::move(cells));
    row_numbers.push_back(row);
  }
  if (rows.empty()) throw IngestionError("no complete data rows", 0, "");

  IngestResult result{Dataset(options.task, Eigen::MatrixXd(0, 0),
                              Eigen::VectorXd(0)),
                      {},
                      nlohmann::json::object(),
                      {}};
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());

  // Column typing: numeric iff the first kept value parses as a number.
  struct Column {
    std::size_t source;
    bool numeric;
    std::vector<double> values;
    std::vector<std::string> categories;
  };
  std::vector<Column> columns;
  for (std::size_t c = 0; c < cols; ++c) {
    if (c == label_col) continue;
    Column col{c, ParseNumber(rows[0][c]).has_value(), {}, {}};
    if (col.numeric) {
      col.values.reserve(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto v = ParseNumber(rows[i][c]);
        if (!v) {
          throw IngestionError("non-numeric cell '" + rows[i][c] +
                                   "' in numeric column",
                               row_numbers[i], header[c]);
        }
        col.values.push_back(*v);
      }
    } else {
      std::set<std::string> seen;
      for (const auto& r : rows) {
        seen.insert(r[c]);
        if (seen.size() > options.max_categories) {
          throw IngestionError(
              "more than " + std::to_string(options.max_categories) +
                  " categories; column cannot be one-hot encoded",
              0, header[c]);
        }
      }
      col.categories.assign(seen.begin(), seen.end());
    }
    columns.push_back(std::move(col));
  }

  int d = 0;
  for (const auto& col : columns) {
    d += col.numeric ? 1 : static_cast<int>(col.categories.size());
  }
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, d);
  nlohmann::json column_meta = nlohmann::json::array();
  int feature = 0;
  for (const auto& col : columns) {
    const std::string& name = header[col.source];
    if (col.numeric) {
      const auto [lo, hi] =
          std::minmax_element(col.values.begin(), col.values.end());
      const bool constant = *lo == *hi;
      if (constant && options.normalize) {
        result.warnings.push_back("column '" + name +
                                  "' is constant; mapped to 0");
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        const double v = col.values[static_cast<std::size_t>(i)];
        if (!options.normalize) {
          if (std::abs(v) > 1.0) {
            throw IngestionError("value " + rows[i][col.source] +
                                     " outside [-1,1] with normalization off",
                                 row_numbers[i], name);
          }
          x(i, feature) = v;
        } else {
          x(i, feature) = constant ? 0.0 : MinMax(v, *lo, *hi);
        }
      }
      column_meta.push_back({{"name", name},
                             {"kind", "numeric"},
                             {"feature", feature},
                             {"min", *lo},
                             {"max", *hi},
                             {"constant", constant}});
      result.feature_names.push_back(name);
      ++feature;
    } else {
      std::map<std::string, int> slot;
      nlohmann::json encoding = nlohmann::json::object();
      for (const auto& cat : col.categories) {
        slot[cat] = feature;
        encoding[cat] = feature;
        result.feature_names.push_back(name + "=" + cat);
        ++feature;
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        x(i, slot.at(rows[i][col.source])) = 1.0;
      }
      column_meta.push_back(
          {{"name", name}, {"kind", "one-hot"}, {"encoding", encoding}});
    }
  }

  Eigen::VectorXd y(n);
  nlohmann::json label_meta = {{"name", options.label_column}};
  std::vector<std::string> label_text(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) label_text[i] = rows[i][label_col];
  if (options.task == TaskKind::kLinear) {
    std::vector<double> v(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto parsed = ParseNumber(label_text[i]);
      if (!parsed) {
        throw IngestionError("non-numeric label '" + label_text[i] + "'",
                             row_numbers[i], options.label_column);
      }
      v[i] = *parsed;
    }
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    for (Eigen::Index i = 0; i < n; ++i) {
      const double yi = v[static_cast<std::size_t>(i)];
      if (!options.normalize) {
        if (std::abs(yi) > 1.0) {
          throw IngestionError("label outside [-1,1] with normalization off",
                               row_numbers[i], options.label_column);
        }
        y[i] = yi;
      } else {
        y[i] = *lo == *hi ? 0.0 : MinMax(yi, *lo, *hi);
      }
    }
    label_meta["kind"] = "numeric";
    label_meta["min"] = *lo;
    label_meta["max"] = *hi;
  } else {
    std::vector<std::string> distinct = label_text;
    std::sort(distinct.begin(), distinct.end(), ValueLess);
    distinct.erase(std::unique(distinct.begin(), distinct.end(),
                               [](const std::string& a, const std::string& b) {
                                 return !ValueLess(a, b) && !ValueLess(b, a);
                               }),
                   distinct.end());
    const bool already_binary =
        std::all_of(distinct.begin(), distinct.end(), [](const auto& s) {
          const auto v = ParseNumber(s);
          return v && (*v == 0.0 || *v == 1.0);
        });
    if (!already_binary && distinct.size() != 2) {
      throw IngestionError("logistic label needs exactly two distinct values, "
                           "found " + std::to_string(distinct.size()),
                           0, options.label_column);
    }
    nlohmann::json mapping = nlohmann::json::object();
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::string& t = label_text[static_cast<std::size_t>(i)];
      y[i] = already_binary ? *ParseNumber(t)
                            : (ValueLess(distinct[0], t) ? 1.0 : 0.0);
    }
    for (const auto& s : distinct) {
      mapping[s] = already_binary ? *ParseNumber(s)
                                  : (s == distinct[0] ? 0.0 : 1.0);
    }
    label_meta["kind"] = "binary";
    label_meta["mapping"] = mapping;
  }

  result.data = Dataset(options.task, std::move(x), std::move(y));
  result.metadata = {{"source", path.string()},
                     {"task", std::string(TaskName(options.task))},
                     {"n", n},
                     {"d", d},
                     {"dropped_rows", dropped},
                     {"normalized", options.normalize},
                     {"columns", column_meta},
                     {"label", label_meta},
                     {"warnings", result.warnings}};
  return result;
}

void WriteCsv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  for (Eigen::Index a = 0; a < data.dim(); ++a) out << 'f' << a << ',';
  out << "label\n";
  char buf[64];
  auto put = [&](double v) {
    // Shortest representation that parses back to the same double.
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, res.ptr - buf);
  };
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index a = 0; a < data.dim(); ++a) {
      put(data.features()(i, a));
      out << ',';
    }
    put(data.labels()[i]);
    out << '\n';
  }
  if (!out) throw InputError("write to '" + path.string() + "' failed");
}

VerticalPartition VSplit(const Dataset& data, int num_parties,
                         SplitScheme scheme,
                         std::vector<std::vector<int>> explicit_sets) {
  const int d = static_cast<int>(data.dim());
  if (scheme == SplitScheme::kEven) {
    return VerticalPartition::Even(d, num_parties);
  }
  if (static_cast<int>(explicit_sets.size()) != num_parties) {
    throw InputError("explicit split lists " +
                     std::to_string(explicit_sets.size()) +
                     " parties, expected " + std::to_string(num_parties));
  }
  return VerticalPartition(d, std::move(explicit_sets));
}

std::pair<Dataset, Dataset> SplitTrainTest(const Dataset& data, double ratio,
                                           std::uint64_t seed) {
  const Eigen::Index n = data.size();
  if (n < 5) throw InputError("train/test split needs at least 5 records");
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw InputError("train ratio must lie in (0, 1)");
  }
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  NoiseStream stream(seed, SeedDomain::kSplit, 0);
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    std::swap(perm[i], perm[stream.NextBelow(i + 1)]);
  }
  const auto train = static_cast<std::size_t>(
      std::floor(ratio * static_cast<double>(n) + 1e-9));
  if (train == 0 || train == perm.size()) {
    throw InputError("train/test split leaves one side empty");
  }
  const std::span<const Eigen::Index> all(perm);
  return {data.Rows(all.first(train)), data.Rows(all.subspan(train))};
}

}  // namespace vfm
