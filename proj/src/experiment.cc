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

#include "vfm/experiment.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

#include "vfm/errors.h"
#include "vfm/rng.h"

namespace vfm {

std::string_view MethodName(Method method) {
  switch (method) {
    case Method::kFm:
      return "fm";
    case Method::kDpsgd:
      return "dpsgd";
    case Method::kNonPrivate:
      return "nonprivate";
  }
  return "?";
}

Method ParseMethod(std::string_view name) {
  if (name == "fm") return Method::kFm;
  if (name == "dpsgd") return Method::kDpsgd;
  if (name == "nonprivate") return Method::kNonPrivate;
  throw InputError("unknown method '" + std::string(name) +
                   "' (expected fm, dpsgd or nonprivate)");
}

void ExperimentConfig::Validate() const {
  if (replicates < 1) throw InputError("replicates must be >= 1");
  if (jobs < 1) throw InputError("jobs must be >= 1");
  if (methods.empty()) throw InputError("no methods selected");
  if (num_parties < 1) throw InputError("K must be >= 1");
  if (budget_mode == BudgetMode::kTopDown && epsilons.empty()) {
    throw InputError("no epsilon values given");
  }
  if (sgd.iterations < 1 || !(sgd.clip > 0.0)) {
    throw InputError("DPSGD needs T >= 1 and C > 0");
  }
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw InputError("train ratio must lie in (0, 1)");
  }
}

std::string FormatNumber(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double Median(std::vector<double> values) {
  if (values.empty()) throw InputError("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 == 1 ? values[m]
                                : 0.5 * (values[m - 1] + values[m]);
}

void WriteResultsCsv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << kResultHeader << '\n';
  for (const ResultRow& r : rows) {
    out << r.dataset << ',' << MethodName(r.method) << ','
        << (r.epsilon ? r.epsilon->ToString() : "inf") << ','
        << r.num_parties << ',' << r.metric << ',' << FormatNumber(r.mean)
        << ',' << FormatNumber(r.std) << ',' << FormatNumber(r.seconds)
        << '\n';
  }
}

namespace {

// Rethrows the active vfm error with context, keeping its category.
[[noreturn]] void RethrowWithContext(const std::string& context) {
  try {
    throw;
  } catch (const ProtocolError& e) {
    throw ProtocolError(std::string(e.what()) + " [" + context + "]");
  } catch (const SolverError& e) {
    throw SolverError(std::string(e.what()) + " [" + context + "]");
  } catch (const InvariantError& e) {
    throw InvariantError(std::string(e.what()) + " [" + context + "]");
  } catch (const OverflowError& e) {
    throw OverflowError(std::string(e.what()) + " [" + context + "]",
                        e.max_safe_terms());
  } catch (const InputError& e) {
    throw InputError(std::string(e.what()) + " [" + context + "]");
  }
}

struct Cell {
  Method method;
  std::optional<Epsilon> epsilon;
};

struct CellResult {
  double value = 0.0;
  double seconds = 0.0;
};

double Score(const Model& model, const Dataset& test) {
  return test.task() == TaskKind::kLinear ? Mse(model, test)
                                          : Accuracy(model, test);
}

nlohmann::json ConfigJson(const ExperimentConfig& c, const std::string& id,
                          const Dataset& sample) {
  nlohmann::json j;
  j["task"] = std::string(TaskName(c.task));
  j["dataset"] = id;
  if (c.csv_path) {
    j["source"] = {{"csv", *c.csv_path},
                   {"label_column", c.label_column},
                   {"normalize", c.normalize}};
  } else {
    j["source"] = {{"synthetic",
                    {{"n", c.synthetic.n},
                     {"d", c.synthetic.d},
                     {"sparsity", c.synthetic.sparsity},
                     {"label_noise", c.synthetic.label_noise},
                     {"logit_scale", c.synthetic.logit_scale},
                     {"seed", "per replicate"}}}};
  }
  j["n"] = sample.size();
  j["d"] = sample.dim();
  j["K"] = c.num_parties;
  j["split"] = c.scheme == SplitScheme::kEven ? "even" : "explicit";
  if (c.scheme == SplitScheme::kExplicit) j["explicit_sets"] = c.explicit_sets;
  nlohmann::json eps = nlohmann::json::array();
  for (const Epsilon& e : c.epsilons) eps.push_back(e.ToString());
  j["epsilons"] = eps;
  j["budget_mode"] =
      c.budget_mode == BudgetMode::kTopDown ? "top-down" : "bottom-up";
  nlohmann::json methods = nlohmann::json::array();
  for (Method m : c.methods) methods.push_back(std::string(MethodName(m)));
  j["methods"] = methods;
  j["backend"] = std::string(BackendName(c.backend));
  j["noise_mode"] = std::string(NoiseModeName(c.noise_mode));
  j["scheduler"] = std::string(SchedulerName(c.scheduler));
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  j["train_ratio"] = c.train_ratio;
  j["ridge_floor"] = c.ridge_floor >= 0.0 ? nlohmann::json(c.ridge_floor)
                                          : nlohmann::json("1e-4 * n_train");
  j["dpsgd"] = {{"iterations", c.sgd.iterations},
                {"learning_rate", c.sgd.learning_rate > 0.0
                                      ? nlohmann::json(c.sgd.learning_rate)
                                      : nlohmann::json("0.1 / n_train")},
                {"clip", c.sgd.clip},
                {"clip_norm", "L1"}};
  j["categorical_rule"] =
      "text columns one-hot encoded, one 0/1 feature per sorted value";
  return j;
}

}  // namespace

ExperimentResult RunExperiment(const ExperimentConfig& config) {
  config.Validate();
  ExperimentResult result;

  std::optional<IngestResult> ingested;
  if (config.csv_path) {
    IngestOptions opts;
    opts.label_column = config.label_column;
    opts.task = config.task;
    opts.normalize = config.normalize;
    ingested = IngestCsv(*config.csv_path, opts);
    result.warnings = ingested->warnings;
  }
  const std::string id =
      !config.dataset_id.empty() ? config.dataset_id
      : config.csv_path ? std::filesystem::path(*config.csv_path).stem().string()
                        : "synthetic";
  auto replicate_data = [&](std::uint64_t seed) {
    if (ingested) return ingested->data;
    DatasetSpec spec = config.synthetic;
    spec.seed = seed;
    return GenSynthetic(spec, config.task).data;
  };
  const int d = ingested ? static_cast<int>(ingested->data.dim())
                         : config.synthetic.d;
  if (config.num_parties > d) {
    throw InputError("K = " + std::to_string(config.num_parties) +
                     " exceeds d = " + std::to_string(d));
  }
  // The partition only depends on d.
  const VerticalPartition partition =
      config.scheme == SplitScheme::kEven
          ? VerticalPartition::Even(d, config.num_parties)
          : VerticalPartition(d, config.explicit_sets);
  if (partition.num_parties() != config.num_parties) {
    throw InputError("explicit split does not list K parties");
  }

  std::vector<Epsilon> epsilons = config.epsilons;
  std::optional<PrivacyBudget> bottom_up;
  if (config.budget_mode == BudgetMode::kBottomUp) {
    bottom_up = PrivacyBudget::BottomUp(config.task, partition,
                                        config.party_budgets,
                                        config.pair_budgets);
    epsilons = {bottom_up->epsilon()};
  }

  std::vector<Cell> cells;
  for (Method m : config.methods) {
    if (m == Method::kNonPrivate) {
      cells.push_back({m, std::nullopt});
    } else {
      for (const Epsilon& e : epsilons) cells.push_back({m, e});
    }
  }

  const int reps = config.replicates;
  std::vector<std::vector<CellResult>> grid(
      static_cast<std::size_t>(reps), std::vector<CellResult>(cells.size()));
  std::vector<std::vector<std::string>> rep_warnings(
      static_cast<std::size_t>(reps));

  auto run_replicate = [&](int r) {
    const std::uint64_t seed =
        DeriveSeed(config.seed, SeedDomain::kReplicate,
                   static_cast<std::uint64_t>(r));
    const Dataset full = replicate_data(seed);
    const auto [train, test] = SplitTrainTest(full, config.train_ratio, seed);
    std::optional<Model> nonprivate;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const Cell& cell = cells[c];
      const std::string context =
          "method " + std::string(MethodName(cell.method)) + ", epsilon " +
          (cell.epsilon ? cell.epsilon->ToString() : "inf") + ", replicate " +
          std::to_string(r);
      const auto start = std::chrono::steady_clock::now();
      Model model;
      try {
        switch (cell.method) {
          case Method::kFm: {
            const PrivacyBudget budget =
                bottom_up ? *bottom_up
                          : PrivacyBudget::TopDown(config.task, partition,
                                                   *cell.epsilon);
            ProtocolOptions opts;
            opts.seed = seed;
            opts.backend = config.backend;
            opts.noise_mode = config.noise_mode;
            opts.scheduler = config.scheduler;
            opts.ridge_floor = config.ridge_floor;
            ProtocolResult run = RunProtocol(train, partition, budget, opts);
            for (auto& w : run.warnings) {
              rep_warnings[r].push_back(context + ": " + w);
            }
            model = std::move(run.model);
            break;
          }
          case Method::kDpsgd: {
            SgdConfig sgd = config.sgd;
            sgd.epsilon = *cell.epsilon;
            model = Dpsgd(train, sgd, seed).model;
            break;
          }
          case Method::kNonPrivate: {
            std::vector<std::string> warnings;
            model = FitNonPrivate(train, &warnings);
            for (auto& w : warnings) {
              rep_warnings[r].push_back(context + ": " + w);
            }
            break;
          }
        }
      } catch (const Error&) {
        RethrowWithContext(context);
      }
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        start)
              .count();
      grid[r][c] = {Score(model, test), seconds};
    }
  };

  if (config.jobs == 1) {
    for (int r = 0; r < reps; ++r) run_replicate(r);
  } else {
    std::atomic<int> next{0};
    std::mutex mu;
    std::exception_ptr error;
    int failed_at = reps;
    std::vector<std::thread> workers;
    for (int t = 0; t < std::min(config.jobs, reps); ++t) {
      workers.emplace_back([&] {
        for (int r = next++; r < reps; r = next++) {
          try {
            run_replicate(r);
          } catch (...) {
            // Keep the lowest failing replicate so the report is stable.
            std::lock_guard lock(mu);
            if (r < failed_at) {
              failed_at = r;
              error = std::current_exception();
            }
          }
        }
      });
    }
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
  }

  const std::string metric =
      config.task == TaskKind::kLinear ? "mse" : "accuracy";
  nlohmann::json rows_meta = nlohmann::json::array();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    ResultRow row;
    row.dataset = id;
    row.method = cells[c].method;
    row.epsilon = cells[c].epsilon;
    row.num_parties = config.num_parties;
    row.metric = metric;
    double total_seconds = 0.0;
    for (int r = 0; r < reps; ++r) {
      row.values.push_back(grid[r][c].value);
      total_seconds += grid[r][c].seconds;
    }
    const double n = static_cast<double>(reps);
    double sum = 0.0;
    for (double v : row.values) sum += v;
    row.mean = sum / n;
    double ss = 0.0;
    for (double v : row.values) ss += (v - row.mean) * (v - row.mean);
    row.std = reps > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    row.median = Median(row.values);
    row.seconds = total_seconds / n;
    rows_meta.push_back({{"method", std::string(MethodName(row.method))},
                         {"epsilon", row.epsilon ? row.epsilon->ToString()
                                                 : std::string("inf")},
                         {"K", row.num_parties},
                         {"metric", metric},
                         {"mean", row.mean},
                         {"std", row.std},
                         {"median", row.median},
                         {"seconds", row.seconds},
                         {"values", row.values}});
    result.rows.push_back(std::move(row));
  }
  for (auto& w : rep_warnings) {
    result.warnings.insert(result.warnings.end(), w.begin(), w.end());
  }

  result.metadata = ConfigJson(config, id, replicate_data(config.seed));
  if (ingested) result.metadata["ingest"] = ingested->metadata;
  if (bottom_up) {
    nlohmann::json singles = nlohmann::json::object();
    for (const auto& [k, e] : bottom_up->single_budgets()) {
      singles["P" + std::to_string(k)] = e;
    }
    nlohmann::json pairs = nlohmann::json::object();
    for (const auto& [kl, e] : bottom_up->pair_budgets()) {
      pairs["P" + std::to_string(kl.first) + "-P" + std::to_string(kl.second)] =
          e;
    }
    result.metadata["bottom_up"] = {{"party_budgets", singles},
                                    {"pair_budgets", pairs},
                                    {"epsilon", bottom_up->epsilon().value()}};
  }
  nlohmann::json levels = nlohmann::json::array();
  for (const Epsilon& e : epsilons) {
    const PrivacyBudget b =
        bottom_up ? *bottom_up : PrivacyBudget::TopDown(config.task, partition, e);
    nlohmann::json per = nlohmann::json::array();
    for (const PartyPrivacy& p : b.per_party()) {
      per.push_back({{"party", p.party},
                     {"delta_f_k", p.delta_f_k},
                     {"epsilon_k", FormatNumber(p.epsilon_k)}});
    }
    levels.push_back({{"epsilon", e.ToString()},
                      {"delta_f", b.delta_f()},
                      {"parties", per}});
  }
  result.metadata["privacy"] = levels;
  result.metadata["rows"] = rows_meta;
  result.metadata["warnings"] = result.warnings;
  return result;
}

ExperimentResult RunSweep(const ExperimentConfig& config,
                          const SweepAxes& axes) {
  if (!axes.sparsity.empty() && config.csv_path) {
    throw InputError("a sparsity sweep needs synthetic data");
  }
  const std::vector<int> parties =
      axes.parties.empty() ? std::vector<int>{config.num_parties}
                           : axes.parties;
  const std::vector<double> sparsity =
      axes.sparsity.empty() ? std::vector<double>{config.synthetic.sparsity}
                            : axes.sparsity;
  ExperimentResult out;
  out.metadata["runs"] = nlohmann::json::array();
  for (double s : sparsity) {
    for (int k : parties) {
      ExperimentConfig c = config;
      c.synthetic.sparsity = s;
      c.num_parties = k;
      if (!axes.sparsity.empty()) {
        const std::string base =
            config.dataset_id.empty() ? "synthetic" : config.dataset_id;
        c.dataset_id = base + "-s" + FormatNumber(s);
      }
      ExperimentResult r = RunExperiment(c);
      out.rows.insert(out.rows.end(), r.rows.begin(), r.rows.end());
      out.warnings.insert(out.warnings.end(), r.warnings.begin(),
                          r.warnings.end());
      out.metadata["runs"].push_back(std::move(r.metadata));
    }
  }
  out.metadata["warnings"] = out.warnings;
  return out;
}

}  // namespace vfm
