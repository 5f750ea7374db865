#include "cemrich/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cemrich {

using nlohmann::json;

CoefficientField load_field_raster(const std::string& path, const StructuredGrid& grid) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open raster file: " + path);
  int nx = 0, ny = 0;
  if (!(in >> nx >> ny)) throw std::runtime_error("raster header parse failure in " + path);
  if (nx != grid.n || ny != grid.n)
    throw std::runtime_error("raster " + path + " is " + std::to_string(nx) + "x" +
                             std::to_string(ny) + ", grid expects " + std::to_string(grid.n) +
                             "x" + std::to_string(grid.n));
  CoefficientField f;
  f.nx = nx;
  f.ny = ny;
  f.values.resize(static_cast<size_t>(nx) * ny);
  for (int row = 0; row < ny; ++row)
    for (int col = 0; col < nx; ++col) {
      double v;
      if (!(in >> v))
        throw std::runtime_error("raster parse failure in " + path + " at row " +
                                 std::to_string(row) + ", column " + std::to_string(col));
      if (!(v > 0.0))
        throw std::runtime_error("non-positive raster value " + std::to_string(v) + " in " +
                                 path + " at row " + std::to_string(row) + ", column " +
                                 std::to_string(col));
      f.values[static_cast<size_t>(row) * nx + col] = v;
    }
  return f;
}

CoefficientField uniform_field(const StructuredGrid& grid, double value) {
  CoefficientField f;
  f.nx = f.ny = grid.n;
  f.values.assign(static_cast<size_t>(grid.n) * grid.n, value);
  return f;
}

double Nonlinearity::operator()(double p) const {
  switch (tag) {
    case NonlinTag::Constant: return 1.0;
    case NonlinTag::Exponential: return std::exp(p);
    case NonlinTag::InverseShift: return 1.0 / (1.0 + std::abs(p));
    case NonlinTag::Gardner: return std::exp(-alpha * std::abs(p));
  }
  return 1.0;
}

double eval_conductivity(const Nonlinearity& nl, double kappa_cell, double p) {
  return kappa_cell * nl(p);
}

double TransferLaw::operator()(double p_i, double p_l) const {
  switch (tag) {
    case TransferTag::Zero: return 0.0;
    case TransferTag::Constant: return beta;
    case TransferTag::ScaledInverseShift: return beta / (1.0 + std::abs(p_i));
  }
  return 0.0;
}

double eval_transfer(const TransferLaw& law, double p_i, double p_l) { return law(p_i, p_l); }

TransferTable TransferTable::zero(int n_continua) {
  TransferTable t;
  t.n_continua = n_continua;
  t.laws.assign(static_cast<size_t>(n_continua) * n_continua, TransferLaw{});
  return t;
}

bool TransferTable::all_zero() const {
  for (const auto& law : laws)
    if (law.tag != TransferTag::Zero) return false;
  return true;
}

bool TransferTable::symmetric() const {
  for (int i = 0; i < n_continua; ++i)
    for (int l = 0; l < i; ++l) {
      const auto& a = at(i, l);
      const auto& b = at(l, i);
      const bool a_const = a.tag == TransferTag::Zero || a.tag == TransferTag::Constant;
      const bool b_const = b.tag == TransferTag::Zero || b.tag == TransferTag::Constant;
      if (!a_const || !b_const) return false;
      const double ba = a.tag == TransferTag::Zero ? 0.0 : a.beta;
      const double bb = b.tag == TransferTag::Zero ? 0.0 : b.beta;
      if (ba != bb) return false;
    }
  return true;
}

double SourceFn::operator()(double t, double x, double y) const {
  (void)t;
  switch (tag) {
    case SourceTag::Constant: return scale;
    case SourceTag::SeparableSine: return scale * std::sin(M_PI * x) * std::sin(M_PI * y);
    case SourceTag::ExpSum: return scale * std::exp(x + y);
  }
  return 0.0;
}

namespace {

const char* nonlin_name(NonlinTag t) {
  switch (t) {
    case NonlinTag::Constant: return "constant";
    case NonlinTag::Exponential: return "exponential";
    case NonlinTag::InverseShift: return "inverse_shift";
    case NonlinTag::Gardner: return "gardner";
  }
  return "constant";
}

NonlinTag nonlin_from_name(const std::string& s) {
  if (s == "constant") return NonlinTag::Constant;
  if (s == "exponential") return NonlinTag::Exponential;
  if (s == "inverse_shift") return NonlinTag::InverseShift;
  if (s == "gardner") return NonlinTag::Gardner;
  throw std::runtime_error("unknown nonlinearity tag: " + s);
}

const char* transfer_name(TransferTag t) {
  switch (t) {
    case TransferTag::Zero: return "zero";
    case TransferTag::Constant: return "constant";
    case TransferTag::ScaledInverseShift: return "scaled_inverse_shift";
  }
  return "zero";
}

TransferTag transfer_from_name(const std::string& s) {
  if (s == "zero") return TransferTag::Zero;
  if (s == "constant") return TransferTag::Constant;
  if (s == "scaled_inverse_shift") return TransferTag::ScaledInverseShift;
  throw std::runtime_error("unknown transfer tag: " + s);
}

const char* source_name(SourceTag t) {
  switch (t) {
    case SourceTag::Constant: return "constant";
    case SourceTag::SeparableSine: return "separable_sine";
    case SourceTag::ExpSum: return "exp_sum";
  }
  return "constant";
}

SourceTag source_from_name(const std::string& s) {
  if (s == "constant") return SourceTag::Constant;
  if (s == "separable_sine") return SourceTag::SeparableSine;
  if (s == "exp_sum") return SourceTag::ExpSum;
  throw std::runtime_error("unknown source tag: " + s);
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw std::runtime_error("unknown config key '" + it.key() + "' in " + where);
  }
}

Nonlinearity parse_nonlinearity(const json& j) {
  reject_unknown_keys(j, {"tag", "alpha"}, "nonlinearity");
  Nonlinearity nl;
  nl.tag = nonlin_from_name(j.at("tag").get<std::string>());
  if (j.contains("alpha")) nl.alpha = j.at("alpha").get<double>();
  if (nl.tag == NonlinTag::Gardner && !j.contains("alpha"))
    throw std::runtime_error("gardner nonlinearity requires alpha");
  return nl;
}

json dump_nonlinearity(const Nonlinearity& nl) {
  json j;
  j["tag"] = nonlin_name(nl.tag);
  if (nl.tag == NonlinTag::Gardner) j["alpha"] = nl.alpha;
  return j;
}

SourceFn parse_source(const json& j) {
  reject_unknown_keys(j, {"tag", "scale"}, "source");
  SourceFn s;
  s.tag = source_from_name(j.at("tag").get<std::string>());
  s.scale = j.at("scale").get<double>();
  return s;
}

json dump_source(const SourceFn& s) {
  return json{{"tag", source_name(s.tag)}, {"scale", s.scale}};
}

} // namespace

RunConfig parse_config(const std::string& json_text) {
  json root = json::parse(json_text);
  reject_unknown_keys(root,
                      {"experiment", "custom", "n", "Hdiv", "m", "n_basis", "delta0",
                       "max_picard"},
                      "config root");
  RunConfig cfg;
  const bool has_exp = root.contains("experiment");
  const bool has_custom = root.contains("custom");
  if (has_exp == has_custom)
    throw std::runtime_error("config must contain exactly one of 'experiment' or 'custom'");

  auto read_common = [&](const json& j) {
    if (j.contains("n")) cfg.n = j.at("n").get<int>();
    if (j.contains("Hdiv")) cfg.Hdiv = j.at("Hdiv").get<int>();
    if (j.contains("m")) {
      if (j.at("m").is_string()) {
        if (j.at("m").get<std::string>() != "auto")
          throw std::runtime_error("config key 'm' must be an integer or \"auto\"");
        cfg.m = -1;
      } else {
        cfg.m = j.at("m").get<int>();
      }
    }
    if (j.contains("n_basis")) cfg.n_basis = j.at("n_basis").get<int>();
    if (j.contains("delta0")) cfg.delta0 = j.at("delta0").get<double>();
    if (j.contains("max_picard")) cfg.max_picard = j.at("max_picard").get<int>();
  };

  if (has_exp) {
    cfg.experiment = root.at("experiment").get<std::string>();
    const auto& names = builtin_experiment_names();
    if (std::find(names.begin(), names.end(), cfg.experiment) == names.end())
      throw std::runtime_error("unknown experiment '" + cfg.experiment + "'");
    read_common(root);
    return cfg;
  }

  const json& c = root.at("custom");
  reject_unknown_keys(c,
                      {"n", "Hdiv", "m", "n_basis", "fields", "nonlinearity", "transfer",
                       "sources", "T", "S", "delta0", "max_picard"},
                      "custom");
  read_common(c);
  for (const auto& p : c.at("fields")) cfg.custom.field_paths.push_back(p.get<std::string>());
  for (const auto& j : c.at("nonlinearity")) cfg.custom.nonlinearities.push_back(parse_nonlinearity(j));
  for (const auto& j : c.at("sources")) cfg.custom.sources.push_back(parse_source(j));
  if (c.contains("transfer")) {
    for (const auto& j : c.at("transfer")) {
      reject_unknown_keys(j, {"i", "l", "tag", "beta"}, "transfer entry");
      RunConfig::Custom::TransferEntry e;
      e.i = j.at("i").get<int>();
      e.l = j.at("l").get<int>();
      e.law.tag = transfer_from_name(j.at("tag").get<std::string>());
      if (j.contains("beta")) e.law.beta = j.at("beta").get<double>();
      if (e.i == e.l) throw std::runtime_error("transfer entry requires i != l");
      cfg.custom.transfer.push_back(e);
    }
  }
  if (c.contains("T") != c.contains("S"))
    throw std::runtime_error("custom transient problems need both T and S");
  if (c.contains("T")) {
    cfg.custom.transient = true;
    cfg.custom.final_time = c.at("T").get<double>();
    cfg.custom.steps = c.at("S").get<int>();
    if (cfg.custom.steps < 1) throw std::runtime_error("S must be >= 1");
  }
  const size_t nc = cfg.custom.field_paths.size();
  if (nc == 0) throw std::runtime_error("custom config needs at least one field");
  if (cfg.custom.nonlinearities.size() != nc || cfg.custom.sources.size() != nc)
    throw std::runtime_error("custom config needs one nonlinearity and one source per continuum");
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  json root;
  auto write_common = [&](json& j) {
    j["n"] = cfg.n;
    j["Hdiv"] = cfg.Hdiv;
    if (cfg.m < 0)
      j["m"] = "auto";
    else
      j["m"] = cfg.m;
    j["n_basis"] = cfg.n_basis;
    j["delta0"] = cfg.delta0;
    j["max_picard"] = cfg.max_picard;
  };
  if (!cfg.experiment.empty()) {
    root["experiment"] = cfg.experiment;
    write_common(root);
  } else {
    json c;
    write_common(c);
    c["fields"] = cfg.custom.field_paths;
    json nls = json::array();
    for (const auto& nl : cfg.custom.nonlinearities) nls.push_back(dump_nonlinearity(nl));
    c["nonlinearity"] = nls;
    json srcs = json::array();
    for (const auto& s : cfg.custom.sources) srcs.push_back(dump_source(s));
    c["sources"] = srcs;
    if (!cfg.custom.transfer.empty()) {
      json tr = json::array();
      for (const auto& e : cfg.custom.transfer) {
        json t;
        t["i"] = e.i;
        t["l"] = e.l;
        t["tag"] = transfer_name(e.law.tag);
        if (e.law.tag != TransferTag::Zero) t["beta"] = e.law.beta;
        tr.push_back(t);
      }
      c["transfer"] = tr;
    }
    if (cfg.custom.transient) {
      c["T"] = cfg.custom.final_time;
      c["S"] = cfg.custom.steps;
    }
    root["custom"] = c;
  }
  return root.dump(2);
}

const std::vector<std::string>& builtin_experiment_names() {
  static const std::vector<std::string> names = {"E1", "E2", "E3", "E4"};
  return names;
}

namespace {

ProblemSpec builtin_spec(const std::string& name, const StructuredGrid& grid,
                         const std::string& data_dir) {
  ProblemSpec spec;
  spec.name = name;
  auto field = [&](const std::string& file) {
    return load_field_raster(data_dir + "/" + file, grid);
  };
  if (name == "E1" || name == "E2") {
    spec.n_continua = 1;
    spec.fields.push_back(field("kappa_single.txt"));
    spec.nonlinearities.push_back({NonlinTag::Exponential});
    spec.transfer = TransferTable::zero(1);
    if (name == "E1") {
      spec.sources.push_back({SourceTag::Constant, 1.0});
    } else {
      spec.sources.push_back({SourceTag::SeparableSine, 1.0});
      spec.transient = true;
      spec.final_time = 2.0;
      spec.steps = 20;
    }
    return spec;
  }
  spec.n_continua = 2;
  spec.transfer = TransferTable::zero(2);
  if (name == "E3") {
    spec.fields.push_back(field("kappa_dual_steady_1.txt"));
    spec.fields.push_back(field("kappa_dual_steady_2.txt"));
    spec.nonlinearities.push_back({NonlinTag::InverseShift});
    spec.nonlinearities.push_back({NonlinTag::InverseShift});
    spec.transfer.at(0, 1) = {TransferTag::ScaledInverseShift, 10.0};
    spec.transfer.at(1, 0) = {TransferTag::ScaledInverseShift, 10.0};
    spec.sources.push_back({SourceTag::Constant, 1.0});
    spec.sources.push_back({SourceTag::Constant, -1.0});
    return spec;
  }
  if (name == "E4") {
    spec.fields.push_back(field("kappa_dual_td_1.txt"));
    spec.fields.push_back(field("kappa_dual_td_2.txt"));
    spec.nonlinearities.push_back({NonlinTag::Gardner, 0.1});
    spec.nonlinearities.push_back({NonlinTag::Gardner, 0.1});
    spec.transfer.at(0, 1) = {TransferTag::ScaledInverseShift, 100.0};
    spec.transfer.at(1, 0) = {TransferTag::ScaledInverseShift, 100.0};
    spec.sources.push_back({SourceTag::ExpSum, 1.0});
    spec.sources.push_back({SourceTag::ExpSum, -1.0});
    spec.transient = true;
    spec.final_time = 2.0;
    spec.steps = 20;
    return spec;
  }
  throw std::runtime_error("unknown experiment '" + name + "'");
}

} // namespace

ProblemSpec make_problem(const RunConfig& cfg, const StructuredGrid& grid,
                         const std::string& data_dir) {
  if (!cfg.experiment.empty()) return builtin_spec(cfg.experiment, grid, data_dir);
  ProblemSpec spec;
  spec.name = "custom";
  spec.n_continua = static_cast<int>(cfg.custom.field_paths.size());
  for (const auto& p : cfg.custom.field_paths) spec.fields.push_back(load_field_raster(p, grid));
  spec.nonlinearities = cfg.custom.nonlinearities;
  spec.transfer = TransferTable::zero(spec.n_continua);
  for (const auto& e : cfg.custom.transfer) {
    if (e.i < 0 || e.l < 0 || e.i >= spec.n_continua || e.l >= spec.n_continua)
      throw std::runtime_error("transfer entry indices out of range");
    spec.transfer.at(e.i, e.l) = e.law;
  }
  spec.sources = cfg.custom.sources;
  spec.transient = cfg.custom.transient;
  spec.final_time = cfg.custom.final_time;
  spec.steps = cfg.custom.steps;
  return spec;
}

std::vector<ProblemSpec> builtin_experiments(const StructuredGrid& grid,
                                             const std::string& data_dir) {
  std::vector<ProblemSpec> specs;
  for (const auto& name : builtin_experiment_names())
    specs.push_back(builtin_spec(name, grid, data_dir));
  return specs;
}

} // namespace cemrich
