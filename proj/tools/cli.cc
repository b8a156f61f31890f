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

#include "cli.h"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include "vfm/data.h"
#include "vfm/errors.h"
#include "vfm/experiment.h"
#include "vfm/protocol.h"
#include "vfm/sensitivity_audit.h"

namespace vfm::cli {
namespace {

struct SyntheticFlags {
  std::string task = "linear";
  long long n = 1000;
  int d = 10;
  double s = 1.0;
  double label_noise = 0.1;
  double logit_scale = 4.0;
};

void AddSyntheticFlags(CLI::App* app, SyntheticFlags& f) {
  app->add_option("--task", f.task, "linear or logistic")
      ->check(CLI::IsMember({"linear", "logistic"}));
  app->add_option("--n", f.n, "records to generate");
  app->add_option("--d", f.d, "features");
  app->add_option("--s", f.s, "sparsity: fraction of non-zero entries");
  app->add_option("--label-noise", f.label_noise,
                  "half-width of the uniform label noise (linear)");
  app->add_option("--logit-scale", f.logit_scale,
                  "logit multiplier for synthetic logistic labels");
}

DatasetSpec ToSpec(const SyntheticFlags& f, std::uint64_t seed) {
  DatasetSpec spec;
  spec.n = f.n;
  spec.d = f.d;
  spec.sparsity = f.s;
  spec.label_noise = f.label_noise;
  spec.logit_scale = f.logit_scale;
  spec.seed = seed;
  return spec;
}

struct RunFlags {
  SyntheticFlags synthetic;
  std::string data;
  std::string label_column = "label";
  bool no_normalize = false;
  std::string dataset_id;
  int parties = 2;
  std::string split = "even";
  std::string sets;
  std::vector<std::string> epsilons = {"1"};
  std::string mode = "top-down";
  std::string party_eps;
  std::string pair_eps;
  std::vector<std::string> methods = {"fm", "nonprivate"};
  std::string backend = "secret-sharing";
  std::string noise_mode = "coefficient";
  std::string scheduler = "deterministic";
  int replicates = 10;
  std::uint64_t seed = 1;
  double rho = -1.0;
  double train_ratio = 0.8;
  int sgd_iterations = 100;
  double sgd_lr = 0.0;
  double sgd_clip = 1.0;
  int jobs = 1;
  std::string out;
  std::string meta;
};

void AddRunFlags(CLI::App* app, RunFlags& f) {
  AddSyntheticFlags(app, f.synthetic);
  app->add_option("--data", f.data, "CSV file (default: synthetic data)");
  app->add_option("--label-column", f.label_column, "label column name");
  app->add_flag("--no-normalize", f.no_normalize,
                "use CSV values as they are (must lie in [-1,1])");
  app->add_option("--dataset-id", f.dataset_id, "dataset name in the table");
  app->add_option("--K", f.parties, "number of parties");
  app->add_option("--split", f.split, "even or explicit")
      ->check(CLI::IsMember({"even", "explicit"}));
  app->add_option("--sets", f.sets,
                  "explicit feature sets, e.g. \"0,1;2,3\" (0-based)");
  app->add_option("--epsilon", f.epsilons, "privacy levels; inf disables noise")
      ->delimiter(',');
  app->add_option("--mode", f.mode, "top-down or bottom-up")
      ->check(CLI::IsMember({"top-down", "bottom-up"}));
  app->add_option("--party-eps", f.party_eps,
                  "bottom-up single-party budgets, e.g. \"1=0.5,2=0.5\"");
  app->add_option("--pair-eps", f.pair_eps,
                  "bottom-up pair budgets, e.g. \"1-2=0.25\"");
  app->add_option("--methods", f.methods, "fm, dpsgd, nonprivate")
      ->delimiter(',');
  app->add_option("--backend", f.backend, "secret-sharing or plaintext-debug");
  app->add_option("--noise-mode", f.noise_mode, "coefficient or party");
  app->add_option("--scheduler", f.scheduler, "deterministic or threaded");
  app->add_option("--replicates", f.replicates, "replicates per row");
  app->add_option("--seed", f.seed, "master seed")->envname("VFM_SEED");
  app->add_option("--rho", f.rho,
                  "eigenvalue floor for the solver (default 1e-4 * n)");
  app->add_option("--train-ratio", f.train_ratio, "training fraction");
  app->add_option("--dpsgd-iterations", f.sgd_iterations, "DPSGD T");
  app->add_option("--dpsgd-lr", f.sgd_lr,
                  "DPSGD learning rate (default 0.1 / n)");
  app->add_option("--dpsgd-clip", f.sgd_clip, "DPSGD L1 clip bound C");
  app->add_option("--jobs", f.jobs, "replicates run concurrently");
  app->add_option("--out", f.out, "result CSV (default: stdout)");
  app->add_option("--meta", f.meta,
                  "metadata sidecar (default: <out>.meta.json, or "
                  "results.meta.json when writing to stdout)");
}

std::vector<std::string> Split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, sep)) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

double ParseDouble(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw InputError("cannot parse " + what + " '" + s + "'");
}

int ParseInt(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw InputError("cannot parse " + what + " '" + s + "'");
}

ExperimentConfig ToConfig(const RunFlags& f) {
  ExperimentConfig c;
  c.task = ParseTask(f.synthetic.task);
  c.synthetic = ToSpec(f.synthetic, f.seed);
  if (!f.data.empty()) c.csv_path = f.data;
  c.label_column = f.label_column;
  c.normalize = !f.no_normalize;
  c.dataset_id = f.dataset_id;
  c.num_parties = f.parties;
  if (f.split == "explicit") {
    c.scheme = SplitScheme::kExplicit;
    for (const std::string& group : Split(f.sets, ';')) {
      std::vector<int> set;
      for (const std::string& idx : Split(group, ',')) {
        set.push_back(ParseInt(idx, "feature index"));
      }
      c.explicit_sets.push_back(std::move(set));
    }
    if (c.explicit_sets.empty()) {
      throw InputError("--split explicit needs --sets");
    }
  }
  c.epsilons.clear();
  for (const std::string& e : f.epsilons) c.epsilons.push_back(Epsilon::Parse(e));
  if (f.mode == "bottom-up") {
    c.budget_mode = BudgetMode::kBottomUp;
    for (const std::string& item : Split(f.party_eps, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw InputError("bad --party-eps item");
      c.party_budgets[ParseInt(item.substr(0, eq), "party")] =
          ParseDouble(item.substr(eq + 1), "budget");
    }
    for (const std::string& item : Split(f.pair_eps, ',')) {
      const auto eq = item.find('=');
      const auto dash = item.find('-');
      if (eq == std::string::npos || dash == std::string::npos || dash > eq) {
        throw InputError("bad --pair-eps item '" + item + "'");
      }
      const int k = ParseInt(item.substr(0, dash), "party");
      const int l = ParseInt(item.substr(dash + 1, eq - dash - 1), "party");
      c.pair_budgets[{std::min(k, l), std::max(k, l)}] =
          ParseDouble(item.substr(eq + 1), "budget");
    }
  }
  c.methods.clear();
  for (const std::string& m : f.methods) c.methods.push_back(ParseMethod(m));
  c.backend = ParseBackend(f.backend);
  c.noise_mode = ParseNoiseMode(f.noise_mode);
  c.scheduler = ParseScheduler(f.scheduler);
  c.replicates = f.replicates;
  c.seed = f.seed;
  c.ridge_floor = f.rho;
  c.train_ratio = f.train_ratio;
  c.sgd.iterations = f.sgd_iterations;
  c.sgd.learning_rate = f.sgd_lr;
  c.sgd.clip = f.sgd_clip;
  c.jobs = f.jobs;
  return c;
}

void WriteJson(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

void Emit(const ExperimentResult& result, const RunFlags& f,
          std::ostream& out, std::ostream& err) {
  if (f.out.empty()) {
    WriteResultsCsv(result.rows, out);
  } else {
    std::ofstream file(f.out, std::ios::trunc);
    if (!file) throw InputError("cannot write '" + f.out + "'");
    WriteResultsCsv(result.rows, file);
  }
  const std::string meta =
      !f.meta.empty()   ? f.meta
      : !f.out.empty() ? f.out + ".meta.json"
                        : "results.meta.json";
  WriteJson(result.metadata, meta);
  for (const std::string& w : result.warnings) err << "warning: " << w << '\n';
}

int CmdGen(const SyntheticFlags& f, std::uint64_t seed,
           const std::string& out_path, std::string meta_path,
           std::ostream& out) {
  const DatasetSpec spec = ToSpec(f, seed);
  const TaskKind task = ParseTask(f.task);
  const SyntheticData gen = GenSynthetic(spec, task);
  WriteCsv(gen.data, out_path);
  if (meta_path.empty()) meta_path = out_path + ".meta.json";
  std::vector<double> w(gen.true_weights.data(),
                        gen.true_weights.data() + gen.true_weights.size());
  WriteJson({{"task", f.task},
             {"n", spec.n},
             {"d", spec.d},
             {"sparsity", spec.sparsity},
             {"label_noise", spec.label_noise},
             {"logit_scale", spec.logit_scale},
             {"seed", seed},
             {"true_weights", w},
             {"label_column", "label"}},
            meta_path);
  out << "wrote " << spec.n << " records, d = " << spec.d << " to "
      << out_path << '\n';
  return kOk;
}

struct AuditFlags {
  std::string task = "linear";
  int d = 4;
  int parties = 2;
  int pairs = 1000;
  int records = 10;
  std::uint64_t seed = 1;
  bool inject = false;
  long long view_n = 200;
  std::string backend = "secret-sharing";
  std::string epsilon = "1";
  long long skip_noise = -1;
};

int CmdAudit(const AuditFlags& f, std::ostream& out) {
  SensitivityAuditConfig cfg;
  cfg.task = ParseTask(f.task);
  cfg.d = f.d;
  cfg.num_parties = f.parties;
  cfg.pairs = f.pairs;
  cfg.records = f.records;
  cfg.seed = f.seed;
  cfg.inject_out_of_range = f.inject;
  if (cfg.d < 1 || cfg.d > 8) {
    throw InputError("the neighbor sweep supports 1 <= d <= 8");
  }
  const SensitivityAuditReport report = RunSensitivityAudit(cfg);
  out << "sensitivity audit: task " << f.task << ", d " << f.d << ", K "
      << f.parties << ", " << report.pairs << " neighbor pairs\n";
  for (const SensitivityCheck& c : report.checks) {
    out << "  " << std::left << std::setw(20) << c.scope << " bound "
        << FormatNumber(c.bound) << ", max distance "
        << FormatNumber(c.max_distance) << ", violations " << c.violations
        << '\n';
  }
  out << "  out-of-domain records (ingestion): " << report.ingestion_faults
      << '\n';
  for (const std::string& o : report.offending) out << "  ! " << o << '\n';

  // Server-view audit on a small synthetic run.
  DatasetSpec spec;
  spec.n = f.view_n;
  spec.d = f.d;
  spec.seed = f.seed;
  const Dataset data = GenSynthetic(spec, cfg.task).data;
  const VerticalPartition partition =
      VerticalPartition::Even(f.d, f.parties);
  ProtocolOptions opts;
  opts.seed = f.seed;
  opts.backend = ParseBackend(f.backend);
  opts.retain_payloads = true;
  if (f.skip_noise >= 0) {
    opts.skip_noise_on = static_cast<std::size_t>(f.skip_noise);
  }
  const ProtocolResult run = RunProtocol(
      data, partition,
      PrivacyBudget::TopDown(cfg.task, partition, Epsilon::Parse(f.epsilon)),
      opts);
  const AuditReport view =
      AuditServerView(run.transcript, data, run.allocation);
  out << "server-view audit: " << view.messages_checked
      << " messages to the server, " << view.findings.size() << " findings, "
      << view.debug_findings.size() << " in debug-tagged messages\n";
  for (const AuditFinding& a : view.findings) {
    out << "  ! seq " << a.seq << " " << TagName(a.tag) << ": " << a.reason
        << '\n';
  }
  const bool pass = report.Passed() && view.Clean();
  out << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? kOk : kProtocolFailure;
}

}  // namespace

int Main(const std::vector<std::string>& args, std::ostream& out,
         std::ostream& err) {
  CLI::App app{"Differentially private regression over vertically "
               "partitioned data"};
  app.require_subcommand(1);

  SyntheticFlags gen_flags;
  std::uint64_t gen_seed = 1;
  std::string gen_out, gen_meta;
  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  AddSyntheticFlags(gen, gen_flags);
  gen->add_option("--seed", gen_seed, "seed")->envname("VFM_SEED");
  gen->add_option("--out", gen_out, "CSV path")->required();
  gen->add_option("--meta", gen_meta, "sidecar (default <out>.meta.json)");
  gen->set_config("--config", "", "flat key=value file");

  RunFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "train and score methods");
  AddRunFlags(run, run_flags);
  run->set_config("--config", "", "flat key=value file");

  RunFlags sweep_flags;
  std::vector<int> sweep_parties;
  std::vector<double> sweep_sparsity;
  CLI::App* sweep = app.add_subcommand("sweep", "cross product of axes");
  AddRunFlags(sweep, sweep_flags);
  sweep->add_option("--K-list", sweep_parties, "party counts")->delimiter(',');
  sweep->add_option("--s-list", sweep_sparsity, "sparsity levels")
      ->delimiter(',');
  sweep->set_config("--config", "", "flat key=value file");

  AuditFlags audit_flags;
  CLI::App* audit = app.add_subcommand("audit", "privacy audits");
  audit->add_option("--task", audit_flags.task)
      ->check(CLI::IsMember({"linear", "logistic"}));
  audit->add_option("--d", audit_flags.d, "features (<= 8)");
  audit->add_option("--K", audit_flags.parties, "parties");
  audit->add_option("--pairs", audit_flags.pairs, "neighbor pairs");
  audit->add_option("--records", audit_flags.records, "records per dataset");
  audit->add_option("--seed", audit_flags.seed)->envname("VFM_SEED");
  audit->add_flag("--inject-out-of-range", audit_flags.inject,
                  "plant a record with |x| = 2");
  audit->add_option("--view-n", audit_flags.view_n,
                    "records in the server-view run");
  audit->add_option("--backend", audit_flags.backend);
  audit->add_option("--epsilon", audit_flags.epsilon);
  audit->add_option("--fault-skip-noise", audit_flags.skip_noise,
                    "coefficient whose noise is skipped (fault injection)");
  audit->set_config("--config", "", "flat key=value file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*gen) return CmdGen(gen_flags, gen_seed, gen_out, gen_meta, out);
    if (*run) {
      Emit(RunExperiment(ToConfig(run_flags)), run_flags, out, err);
      return kOk;
    }
    if (*sweep) {
      const SweepAxes axes{sweep_parties, sweep_sparsity};
      Emit(RunSweep(ToConfig(sweep_flags), axes), sweep_flags, out, err);
      return kOk;
    }
    if (*audit) return CmdAudit(audit_flags, out);
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const ProtocolError& e) {
    err << "protocol error: " << e.what() << '\n';
    return kProtocolFailure;
  } catch (const InvariantError& e) {
    err << "privacy invariant violated: " << e.what() << '\n';
    return kProtocolFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace vfm::cli
