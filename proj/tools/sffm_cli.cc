// Command-line front end: model validation, return operators, transient and
// first-return measures, Monte Carlo cross-checks and the built-in examples.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sffm/first_return.h"
#include "sffm/model.h"
#include "sffm/model_file.h"
#include "sffm/return_ops.h"
#include "sffm/simulate.h"
#include "sffm/transient.h"

namespace {

using sffm::Mat;
using sffm::RowVec;

constexpr const char* kVersion = "0.1.0";
constexpr double kInf = std::numeric_limits<double>::infinity();

enum ExitCode { kOk = 0, kValidation = 1, kNumerical = 2, kUsage = 3 };

std::string Fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void Add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
  void Note(const std::string& line) { notes_.push_back(line); }

  void Write(std::ostream& os, const std::string& command, const std::string& hash,
             const std::string& seed) const {
    os << "# command: " << command << "\n"
       << "# model_hash: " << hash << "\n"
       << "# version: " << kVersion << "\n"
       << "# seed: " << seed << "\n";
    for (const auto& n : notes_) os << "# note: " << n << "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
    os << "\n";
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << "\n";
    }
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::string> notes_;
};

struct Common {
  std::string model_path;
  std::string order = "natural";
  std::string out;
};

struct Loaded {
  sffm::ModelFile file;
  sffm::ResolvedModel resolved;
  std::string hash;
};

Loaded Load(const std::string& path) {
  if (path.empty()) throw CLI::RequiredError("--model");
  // "example:k" names a built-in model.
  sffm::ModelFile file = path.rfind("example:", 0) == 0
                             ? sffm::BuiltinExample(std::atoi(path.c_str() + 8))
                             : sffm::LoadModelFile(path);
  sffm::ResolvedModel resolved = sffm::Resolve(file);
  std::string hash = sffm::ContentHash(file);
  return {std::move(file), std::move(resolved), std::move(hash)};
}

void Emit(const Table& t, const Common& c, const std::string& command,
          const std::string& hash, const std::string& seed = "-") {
  if (c.out.empty()) {
    t.Write(std::cout, command, hash, seed);
    return;
  }
  std::ofstream os(c.out);
  if (!os) throw std::ios_base::failure("cannot write " + c.out);
  t.Write(os, command, hash, seed);
}

// Phase positions in print order.
std::vector<int> PrintOrder(const sffm::SffmModel<double>& m, const std::string& order) {
  if (order == "rsign") return m.partition().perm_r;
  std::vector<int> id(m.n());
  for (int i = 0; i < m.n(); ++i) id[i] = i;
  return id;
}

sffm::TransientOptions CheckPolicy(const sffm::ResolvedModel& r) {
  sffm::TransientOptions o;
  if (r.certified) o.check_order = -1;
  return o;
}

std::vector<double> DefaultVGrid() {
  std::vector<double> v;
  for (int i = 0; i <= 100; ++i) v.push_back(i / 20.0);
  return v;
}

void Invalid(const std::vector<std::string>& issues) {
  if (issues.empty()) return;
  std::string all;
  for (const auto& s : issues) all += (all.empty() ? "" : "; ") + s;
  throw std::invalid_argument(all);
}

void RequireValid(const sffm::ResolvedModel& r) {
  Invalid(sffm::validate(r.model));
  Invalid(sffm::validate(r.model, r.init));
}

int CmdValidate(const Common& c) {
  const Loaded l = Load(c.model_path);
  const auto& m = l.resolved.model;
  Table t({"check", "detail", "status"});
  bool ok = true;
  for (const auto& v : sffm::validate(m)) {
    t.Add({"model", v, "fail"});
    ok = false;
  }
  for (const auto& v : sffm::validate(m, l.resolved.init)) {
    t.Add({"init", v, "fail"});
    ok = false;
  }
  if (ok) {
    const auto s = sffm::stability(m);
    t.Add({"drift_x", Fmt(s.drift_x), sffm::ToString(s.class_x)});
    t.Add({"drift_y", Fmt(s.drift_y), sffm::ToString(s.class_y)});
    for (const auto& b : sffm::check_boundary(m, l.resolved.init, 5)) {
      t.Add({"boundary_order_" + std::to_string(b.order), Fmt(b.error),
             b.pass ? "pass" : "fail"});
      ok = ok && b.pass;
    }
    if (l.resolved.certified) t.Note("boundary conditions hold at every order by construction");
  }
  Emit(t, c, "validate", l.hash);
  return ok ? kOk : kValidation;
}

void AddMatrix(Table* t, const std::string& name, const Mat<double>& M,
               const std::vector<int>& rows, const std::vector<int>& cols,
               const std::vector<int>& order) {
  auto inv = sffm::InversePermutation(order);
  std::vector<int> r_sorted = rows, c_sorted = cols;
  auto by_order = [&](int a, int b) { return inv[a] < inv[b]; };
  std::sort(r_sorted.begin(), r_sorted.end(), by_order);
  std::sort(c_sorted.begin(), c_sorted.end(), by_order);
  auto pos = [](const std::vector<int>& v, int x) {
    return static_cast<int>(std::find(v.begin(), v.end(), x) - v.begin());
  };
  for (int i : r_sorted)
    for (int j : c_sorted)
      t->Add({name, std::to_string(i + 1), std::to_string(j + 1),
              Fmt(M(pos(rows, i), pos(cols, j)))});
}

int CmdReturnOps(const Common& c, double lambda) {
  const Loaded l = Load(c.model_path);
  RequireValid(l.resolved);
  const auto& m = l.resolved.model;
  if (std::isnan(lambda)) lambda = l.resolved.init.lambda;
  const auto ops = sffm::assemble(m, lambda);
  const auto order = PrintOrder(m, c.order);
  const auto& p = m.partition();
  std::vector<int> all = order;
  std::sort(all.begin(), all.end());
  Table t({"quantity", "from_phase", "to_phase", "value"});
  AddMatrix(&t, "Psi", ops.psi, p.s_plus_r, p.s_minus_r, order);
  AddMatrix(&t, "Xi", ops.xi, p.s_minus_r, p.s_plus_r, order);
  AddMatrix(&t, "Phi", ops.phi, all, all, order);
  AddMatrix(&t, "M", ops.m, all, all, order);
  AddMatrix(&t, "Psi_lambda", ops.psi_l, p.s_plus_r, p.s_minus_r, order);
  AddMatrix(&t, "Xi_lambda", ops.xi_l, p.s_minus_r, p.s_plus_r, order);
  AddMatrix(&t, "Phi_lambda", ops.phi_l, all, all, order);
  AddMatrix(&t, "M_lambda", ops.m_l, all, all, order);
  auto report = [&](const char* name, const sffm::SolveReport& r) {
    t.Note(std::string(name) + " iterations=" + std::to_string(r.iterations) +
           " residual=" + Fmt(r.residual) + " converged=" + (r.converged ? "yes" : "no"));
  };
  report("Psi", ops.psi_report);
  report("Xi", ops.xi_report);
  report("Psi_lambda", ops.psi_l_report);
  report("Xi_lambda", ops.xi_l_report);
  t.Note("lambda=" + Fmt(lambda) + " identity_error=" + Fmt(ops.identity_error) +
         " identity_error_lambda=" + Fmt(ops.identity_error_l));
  const RowVec<double> rows_l = ops.phi_l.rowwise().sum().transpose();
  for (int i : order) t.Note("Phi_lambda row " + std::to_string(i + 1) + " sum=" + Fmt(rows_l(i)));
  Emit(t, c, "return-ops", l.hash);
  return kOk;
}

void AddVector(Table* t, const std::string& quantity, double y, double v,
               const RowVec<double>& values, const std::vector<int>& order) {
  for (int j : order)
    t->Add({quantity, Fmt(y), Fmt(v), std::to_string(j + 1), Fmt(values(j))});
}

int CmdTransient(const Common& c, std::vector<double> ys, std::vector<double> vs) {
  const Loaded l = Load(c.model_path);
  RequireValid(l.resolved);
  const auto& m = l.resolved.model;
  const auto& init = l.resolved.init;
  if (ys.empty()) ys = {0.1, 1.0};
  if (vs.empty()) vs = DefaultVGrid();
  const auto order = PrintOrder(m, c.order);
  const auto opts = CheckPolicy(l.resolved);
  Table t({"quantity", "y", "v", "phase", "value"});
  for (double y : ys) {
    for (double v : vs) AddVector(&t, "mu_exp_Dy", y, v, sffm::mu_exp_Dy(m, init, y, v, opts).values, order);
    const auto md = sffm::mass_decomposition(m, init, y, opts);
    AddVector(&t, "at_zero", y, 0, md.at_zero, order);
    AddVector(&t, "above_zero", y, kInf, md.above_zero, order);
    AddVector(&t, "phase_marginal", y, kInf, md.phase_marginal, order);
  }
  if (sffm::stability(m).class_x == sffm::DriftClass::kStable) {
    const auto lim = sffm::limit_y_infinity(m, init);
    AddVector(&t, "limit_decay", kInf, kInf, lim.decay, order);
    AddVector(&t, "limit_constant", kInf, kInf, lim.constant, order);
    for (double v : vs) AddVector(&t, "limit", kInf, v, lim.at(v), order);
  } else {
    t.Note("X is not stable; no y->infinity limit");
  }
  Emit(t, c, "transient", l.hash);
  return kOk;
}

int CmdFirstReturn(const Common& c, std::vector<double> vs) {
  const Loaded l = Load(c.model_path);
  RequireValid(l.resolved);
  const auto& m = l.resolved.model;
  const auto& init = l.resolved.init;
  if (vs.empty()) vs = DefaultVGrid();
  const auto order = PrintOrder(m, c.order);
  const auto ops = sffm::assemble(m, init.lambda);
  const auto opts = CheckPolicy(l.resolved);
  Table t({"quantity", "y", "v", "phase", "value"});
  for (double v : vs) {
    const auto fr = sffm::mu_phi(m, init, v, ops, opts);
    AddVector(&t, "mu_phi", 0, v, fr.values, order);
  }
  const auto whole = sffm::mu_phi(m, init, 0.0, ops, opts);
  AddVector(&t, "const_part", 0, kInf, whole.const_part, order);
  AddVector(&t, "decay_coefficient", 0, kInf, whole.decay_part, order);
  Emit(t, c, "first-return", l.hash);
  return kOk;
}

int ThreadsFromEnv() {
  const char* s = std::getenv("SFFM_THREADS");
  return s ? std::atoi(s) : 0;
}

int CmdSimulate(const Common& c, const std::string& target, double y,
                std::vector<double> vs, long long reps, unsigned long long seed,
                double escape, const std::string& raw) {
  const Loaded l = Load(c.model_path);
  RequireValid(l.resolved);
  const auto& m = l.resolved.model;
  const auto& init = l.resolved.init;
  if (vs.empty()) vs = {0.5, 1.0, 2.0};
  sffm::SimConfig cfg;
  cfg.seed = seed;
  cfg.replications = reps;
  cfg.escape_level = escape;
  cfg.threads = ThreadsFromEnv();
  const auto order = PrintOrder(m, c.order);
  const auto opts = CheckPolicy(l.resolved);
  sffm::SampleBatch batch;
  if (target == "omega") {
    batch = sffm::run_to_omega(m, init, y, cfg);
  } else {
    batch = sffm::run_to_theta(m, init, cfg);
  }
  std::optional<sffm::ReturnOperators<double>> ops;
  if (target == "theta") ops = sffm::assemble(m, init.lambda);
  Table t({"target", "y", "v", "phase", "estimate", "std_error", "analytic", "z_score"});
  for (double v : vs) {
    const auto emp = sffm::empirical_measure(batch, m.n(), v);
    const RowVec<double> ana = target == "omega"
                                   ? sffm::mu_exp_Dy(m, init, y, v, opts).values
                                   : sffm::mu_phi(m, init, v, *ops, opts).values;
    for (int j : order) {
      const double se = emp.standard_error(j);
      const double diff = emp.estimate(j) - ana(j);
      const double z = se > 0 ? diff / se : (diff == 0 ? 0.0 : kInf);
      t.Add({target, target == "omega" ? Fmt(y) : "-", Fmt(v), std::to_string(j + 1),
             Fmt(emp.estimate(j)), Fmt(se), Fmt(ana(j)), Fmt(z)});
    }
  }
  t.Note("replications=" + std::to_string(batch.replications) +
         " capped=" + std::to_string(batch.capped) +
         " escaped=" + std::to_string(batch.escaped));
  if (!raw.empty()) {
    std::ofstream os(raw);
    if (!os) throw std::ios_base::failure("cannot write " + raw);
    sffm::WriteRawSamples(batch, os);
  }
  Emit(t, c, "simulate " + target, l.hash, std::to_string(seed));
  return kOk;
}

// Reference values for the built-in examples.
struct Check {
  std::string quantity;
  int phase;
  double computed;
  double reference;
  double tol;
};

void CompareVector(std::vector<Check>* out, const std::string& q, const RowVec<double>& got,
                   const std::vector<double>& ref, const std::vector<int>& order, double tol) {
  for (std::size_t k = 0; k < ref.size(); ++k)
    out->push_back({q, order[k] + 1, got(order[k]), ref[k], tol});
}

void CompareMatrix(std::vector<Check>* out, const std::string& q, const Mat<double>& got,
                   const std::vector<std::vector<double>>& ref, const std::vector<int>& order,
                   double tol) {
  for (std::size_t i = 0; i < ref.size(); ++i)
    for (std::size_t j = 0; j < ref[i].size(); ++j)
      out->push_back({q + "(" + std::to_string(order[j] + 1) + ")", order[i] + 1,
                      got(order[i], order[j]), ref[i][j], tol});
}

int CmdExample(const Common& c, int k) {
  if (k < 1 || k > 6) throw std::invalid_argument("unknown example " + std::to_string(k));
  const sffm::ModelFile file = sffm::BuiltinExample(k);
  const sffm::ResolvedModel r = sffm::Resolve(file);
  RequireValid(r);
  const auto& m = r.model;
  const auto& init = r.init;
  const auto s = sffm::stability(m);
  const auto natural = PrintOrder(m, "natural");
  const auto listing = m.partition().perm_r;
  std::vector<Check> checks;
  Table t({"quantity", "phase", "computed", "reference", "abs_diff", "tol", "status"});
  auto boundary_ok = [&] {
    for (const auto& b : sffm::check_boundary(m, init, 10))
      if (!b.pass) return 0.0;
    return 1.0;
  };
  switch (k) {
    case 1:
    case 2: {
      CompareVector(&checks, "nu0", init.nu0, {0.2, 0.6}, natural, 1e-12);
      CompareVector(&checks, "P", init.point_mass, {0.0, 0.2}, natural, 1e-12);
      checks.push_back({"boundary_orders_0_to_10_pass", 0, boundary_ok(), 1.0, 0});
      CompareVector(&checks, "pi", s.pi, {1.0 / 3, 2.0 / 3}, natural, 1e-12);
      if (k == 1) {
        checks.push_back({"drift_x_negative", 0, s.drift_x < 0 ? 1.0 : 0.0, 1.0, 0});
        checks.push_back({"drift_y_negative", 0, s.drift_y < 0 ? 1.0 : 0.0, 1.0, 0});
      } else {
        t.Note("reference labels X unstable and Y stable here; computed drift_x=" +
               Fmt(s.drift_x) + " (" + sffm::ToString(s.class_x) + "), drift_y=" +
               Fmt(s.drift_y) + " (" + sffm::ToString(s.class_y) + ")");
      }
      break;
    }
    case 3: {
      CompareVector(&checks, "pi", s.pi, {1.0 / 6, 1.0 / 6, 1.0 / 3, 1.0 / 3}, natural, 1e-12);
      checks.push_back({"drift_y", 0, s.drift_y, 0.0, 1e-10});
      checks.push_back({"drift_x_negative", 0, s.drift_x < 0 ? 1.0 : 0.0, 1.0, 0});
      CompareVector(&checks, "nu0", init.nu0, {0.1, 0.1, 0.3, 0.3}, natural, 1e-12);
      checks.push_back({"boundary_orders_0_to_10_pass", 0, boundary_ok(), 1.0, 0});
      break;
    }
    case 4: {
      CompareVector(&checks, "nu0", init.nu0, {0.08, 0.12, 0.3, 0.3}, natural, 1e-12);
      CompareVector(&checks, "P", init.point_mass, {0, 0, 0.1, 0.1}, natural, 1e-12);
      checks.push_back({"boundary_orders_0_to_10_pass", 0, boundary_ok(), 1.0, 0});
      checks.push_back({"pi1+pi2", 0, s.pi(0) + s.pi(1), 1.0 / 3, 1e-12});
      checks.push_back({"pi3+pi4", 0, s.pi(2) + s.pi(3), 2.0 / 3, 1e-12});
      checks.push_back({"drift_x_negative", 0, s.drift_x < 0 ? 1.0 : 0.0, 1.0, 0});
      checks.push_back({"drift_y_negative", 0, s.drift_y < 0 ? 1.0 : 0.0, 1.0, 0});
      t.Note("printed pi3 = pi4 = b/(2(2b+beta)) does not normalize; pi is solved from pi T = 0");
      break;
    }
    case 5: {
      const auto ops = sffm::assemble(m, init.lambda);
      const double tol = 1e-9;
      CompareMatrix(&checks, "Phi", ops.phi, {{0, 1}, {0.5, 0}}, natural, tol);
      CompareMatrix(&checks, "Phi_lambda", ops.phi_l, {{0, 1}, {0.5, 0}}, natural, tol);
      const auto fr = sffm::mu_phi(m, init, 0.0, ops, CheckPolicy(r));
      CompareVector(&checks, "mu_Phi_const", fr.const_part, {0.4, 0.2}, natural, tol);
      CompareVector(&checks, "nu_over_lambda_Phi_lambda", RowVec<double>(init.nu0 / init.lambda * ops.phi_l),
                    {0.3, 0.2}, natural, tol);
      for (double v : {0.5, 1.0, 2.0}) {
        const double e = std::exp(-v);
        CompareVector(&checks, "mu_Phi(v=" + Fmt(v) + ")", sffm::mu_phi(m, init, v, ops, CheckPolicy(r)).values,
                      {0.4 - 0.3 * e, 0.2 - 0.2 * e}, natural, tol);
      }
      const auto lim = sffm::limit_y_infinity(m, init);
      CompareVector(&checks, "limit_decay", lim.decay, {0.3333, 0.3333}, natural, 1e-4);
      CompareVector(&checks, "limit_constant", lim.constant, {0.3333, 0.6667}, natural, 1e-4);
      break;
    }
    case 6: {
      const auto ops = sffm::assemble(m, init.lambda);
      const double tol = 1e-4;
      CompareMatrix(&checks, "Phi", ops.phi,
                    {{0, 0, 0.2662, 0.7338}, {0, 0, 0.4314, 0.5686},
                     {0.1774, 0.7190, 0, 0}, {0.2935, 0.5686, 0, 0}}, listing, tol);
      CompareMatrix(&checks, "Phi_lambda", ops.phi_l,
                    {{0, 0, 0.6354, 0.7292}, {0, 0, 0.3962, 0.2077},
                     {0.4236, 0.6603, 0, 0}, {0.2917, 0.2077, 0, 0}}, listing, tol);
      CompareVector(&checks, "mu_total", init.total(), {0.08, 0.40, 0.12, 0.40}, listing, 1e-12);
      const auto fr = sffm::mu_phi(m, init, 0.0, ops, CheckPolicy(r));
      CompareVector(&checks, "mu_Phi_const", fr.const_part, {0.1387, 0.3137, 0.1939, 0.2861}, listing, tol);
      CompareVector(&checks, "nu_over_lambda_Phi_lambda", RowVec<double>(init.nu0 / init.lambda * ops.phi_l),
                    {0.1383, 0.1415, 0.1697, 0.1206}, listing, tol);
      const auto lim = sffm::limit_y_infinity(m, init);
      CompareVector(&checks, "limit_decay", lim.decay, {0.1333, 0.1667, 0.2000, 0.1667}, listing, tol);
      CompareVector(&checks, "limit_constant", lim.constant, {0.1333, 0.3333, 0.2000, 0.3333}, listing, tol);
      break;
    }
  }
  bool ok = true;
  for (const Check& ch : checks) {
    const double diff = std::abs(ch.computed - ch.reference);
    const bool pass = diff <= ch.tol;
    ok = ok && pass;
    t.Add({ch.quantity, ch.phase ? std::to_string(ch.phase) : "-", Fmt(ch.computed),
           Fmt(ch.reference), Fmt(diff), Fmt(ch.tol), pass ? "pass" : "FAIL"});
  }
  Emit(t, c, "example " + std::to_string(k), sffm::ContentHash(file));
  return ok ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic fluid-fluid model solver"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;
  auto add_common = [&](CLI::App* sub, bool needs_model = true) {
    if (needs_model) sub->add_option("--model", common.model_path, "Model file (JSON) or example:k")->required();
    // "paper" and --paper-order are kept as hidden spellings of rsign.
    sub->add_option("--order", common.order, "Phase print order: natural, or rsign (S+ then S-)")
        ->check([](const std::string& v) {
          return v == "natural" || v == "rsign" || v == "paper"
                     ? std::string()
                     : "--order must be natural or rsign";
        });
    sub->add_flag_callback("--paper-order", [&] { common.order = "rsign"; })->group("");
    sub->add_option("--out", common.out, "Write CSV here instead of stdout");
  };

  auto* validate = app.add_subcommand("validate", "Check model invariants and boundary conditions");
  add_common(validate);

  double lambda = std::numeric_limits<double>::quiet_NaN();
  auto* ret = app.add_subcommand("return-ops", "Print Psi, Xi, Phi, M and tilted versions");
  add_common(ret);
  ret->add_option("--lambda", lambda, "Tilt (default: from the initial distribution)")
      ->check(CLI::PositiveNumber);

  std::vector<double> ys, vs;
  auto* tr = app.add_subcommand("transient", "Distribution at omega(y) over a (y, v) grid");
  add_common(tr);
  tr->add_option("--y", ys, "y grid")->delimiter(',')->check(CLI::NonNegativeNumber);
  tr->add_option("--v", vs, "v grid")->delimiter(',')->check(CLI::NonNegativeNumber);

  auto* fr = app.add_subcommand("first-return", "First-return measure over a v grid");
  add_common(fr);
  fr->add_option("--v", vs, "v grid")->delimiter(',')->check(CLI::NonNegativeNumber);

  std::string target = "omega";
  double y = 1.0;
  long long reps = 100000;
  unsigned long long seed = 1;
  double escape = 50.0;
  std::string raw;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo estimates next to analytic values");
  add_common(sim);
  sim->add_option("--target", target, "Stopping time")->check(CLI::IsMember({"omega", "theta"}));
  sim->add_option("--y", y, "In-out level for omega")->check(CLI::PositiveNumber);
  sim->add_option("--v", vs, "v grid")->delimiter(',')->check(CLI::NonNegativeNumber);
  sim->add_option("--reps", reps, "Replications")->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "Seed");
  sim->add_option("--escape", escape, "Escape level for non-returning paths")
      ->check(CLI::PositiveNumber);
  sim->add_option("--raw", raw, "Dump raw samples here");

  int k = 0;
  auto* ex = app.add_subcommand("example", "Run a built-in example against reference values");
  add_common(ex, false);
  ex->add_option("k", k, "Example number 1..6")->required();

  try {
    app.parse(argc, argv);
    if (common.order == "paper") common.order = "rsign";
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return CmdValidate(common);
    if (*ret) return CmdReturnOps(common, lambda);
    if (*tr) return CmdTransient(common, ys, vs);
    if (*fr) return CmdFirstReturn(common, vs);
    if (*sim) return CmdSimulate(common, target, y, vs, reps, seed, escape, raw);
    if (*ex) return CmdExample(common, k);
  } catch (const sffm::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
