#include "sffm/model_file.h"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace sffm {
namespace {

using nlohmann::json;

Vec<double> ReadVec(const json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string(what) + " must be an array");
  Vec<double> v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

RowVec<double> ReadRow(const json& j, const char* what) {
  return ReadVec(j, what).transpose();
}

Mat<double> ReadMat(const json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string(what) + " must be an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? j[0].size() : 0;
  Mat<double> M(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw std::invalid_argument(std::string(what) + " is not rectangular");
    for (std::size_t k = 0; k < cols; ++k) M(i, k) = j[i][k].get<double>();
  }
  return M;
}

template <typename Derived>
json WriteVec(const Eigen::MatrixBase<Derived>& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json WriteMat(const Mat<double>& M) {
  json out = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) out.push_back(WriteVec(M.row(i)));
  return out;
}

const json& Field(const json& obj, const char* key) {
  if (!obj.contains(key)) throw std::invalid_argument(std::string("missing field \"") + key + "\"");
  return obj.at(key);
}

TandemParams<double> TandemExample(double r_share, bool four_phase,
                                   bool opposite_signs) {
  TandemParams<double> p;
  p.b = 1;
  p.beta = 1;
  p.gamma = 1;
  if (!four_phase) {
    p.T_pm = Mat<double>::Constant(1, 1, 2.0);
    p.T_mp = Mat<double>::Constant(1, 1, 1.0);
    p.abs_r = Vec<double>::Ones(2);
    p.c_signs = Vec<double>(2);
    p.c_signs << 1, -1;
    p.r_signs = opposite_signs ? Vec<double>(-p.c_signs) : p.c_signs;
    p.P_minus = RowVec<double>::Constant(1, 0.2);
    return p;
  }
  p.T_pm = Mat<double>::Ones(2, 2);
  p.T_mp = Mat<double>(2, 2);
  p.T_mp << 1 - r_share, r_share, 1 - r_share, r_share;
  p.abs_r = Vec<double>::Ones(4);
  p.c_signs = Vec<double>(4);
  p.c_signs << 1, 1, -1, -1;
  p.r_signs = Vec<double>(4);
  p.r_signs << 1, -1, -1, 1;
  p.P_minus = RowVec<double>::Constant(2, 0.1);
  return p;
}

}  // namespace

ModelFile ParseModelFile(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("model file must be a JSON object");
  ModelFile f;
  f.schema = doc.value("schema", 1);
  if (f.schema != 1) throw std::invalid_argument("unsupported schema version");
  if (doc.contains("model")) {
    const json& m = doc.at("model");
    Mat<double> T = ReadMat(Field(m, "T"), "model.T");
    Vec<double> c = ReadVec(Field(m, "c"), "model.c");
    Vec<double> r = ReadVec(Field(m, "r"), "model.r");
    if (m.contains("n") && m.at("n").get<long>() != T.rows())
      throw std::invalid_argument("model.n does not match T");
    f.model.emplace(std::move(T), std::move(c), std::move(r));
  }
  if (doc.contains("init")) {
    const json& i = doc.at("init");
    InitialDistribution<double> init;
    init.lambda = Field(i, "lambda").get<double>();
    init.nu0 = ReadRow(Field(i, "nu0"), "init.nu0");
    init.point_mass = ReadRow(Field(i, "P"), "init.P");
    f.init = init;
  }
  if (doc.contains("tandem")) {
    const json& t = doc.at("tandem");
    TandemParams<double> p;
    p.b = Field(t, "b").get<double>();
    p.beta = Field(t, "beta").get<double>();
    p.gamma = Field(t, "gamma").get<double>();
    p.T_pm = ReadMat(Field(t, "T_pm"), "tandem.T_pm");
    p.T_mp = ReadMat(Field(t, "T_mp"), "tandem.T_mp");
    p.abs_r = ReadVec(Field(t, "abs_r"), "tandem.abs_r");
    p.r_signs = ReadVec(Field(t, "r_signs"), "tandem.r_signs");
    p.c_signs = ReadVec(Field(t, "c_signs"), "tandem.c_signs");
    p.P_minus = ReadRow(Field(t, "P_minus"), "tandem.P_minus");
    if (t.contains("nu_minus_weights"))
      p.nu_minus_weights = ReadRow(t.at("nu_minus_weights"), "tandem.nu_minus_weights");
    f.tandem = p;
  }
  if (f.init.has_value() == f.tandem.has_value())
    throw std::invalid_argument("exactly one of \"init\" and \"tandem\" is required");
  if (f.init && !f.model) throw std::invalid_argument("\"init\" requires a \"model\" section");
  if (doc.contains("analysis")) f.analysis = doc.at("analysis");
  return f;
}

json ToJson(const ModelFile& f) {
  json doc;
  doc["schema"] = f.schema;
  if (f.model) {
    doc["model"] = {{"n", f.model->n()},
                    {"T", WriteMat(f.model->T())},
                    {"c", WriteVec(f.model->c())},
                    {"r", WriteVec(f.model->r())}};
  }
  if (f.init) {
    doc["init"] = {{"lambda", f.init->lambda},
                   {"nu0", WriteVec(f.init->nu0)},
                   {"P", WriteVec(f.init->point_mass)}};
  }
  if (f.tandem) {
    const auto& p = *f.tandem;
    doc["tandem"] = {{"b", p.b},
                     {"beta", p.beta},
                     {"gamma", p.gamma},
                     {"T_pm", WriteMat(p.T_pm)},
                     {"T_mp", WriteMat(p.T_mp)},
                     {"abs_r", WriteVec(p.abs_r)},
                     {"r_signs", WriteVec(p.r_signs)},
                     {"c_signs", WriteVec(p.c_signs)},
                     {"P_minus", WriteVec(p.P_minus)}};
    if (p.nu_minus_weights.size() > 0)
      doc["tandem"]["nu_minus_weights"] = WriteVec(p.nu_minus_weights);
  }
  doc["analysis"] = f.analysis;
  return doc;
}

ModelFile LoadModelFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open model file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    return ParseModelFile(doc);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed model file: ") + e.what());
  }
}

ResolvedModel Resolve(const ModelFile& f) {
  if (f.tandem) {
    auto [model, init] = build_tandem_model(*f.tandem);
    if (f.model) {
      const bool same = f.model->T().rows() == model.T().rows() &&
                        (f.model->T() - model.T()).cwiseAbs().maxCoeff() <= 1e-12 &&
                        (f.model->c() - model.c()).cwiseAbs().maxCoeff() <= 1e-12 &&
                        (f.model->r() - model.r()).cwiseAbs().maxCoeff() <= 1e-12;
      if (!same) throw std::invalid_argument("model section disagrees with tandem parameters");
    }
    return {std::move(model), init, true};
  }
  return {*f.model, *f.init, false};
}

std::string ContentHash(const ModelFile& f) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : ToJson(f).dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ModelFile BuiltinExample(int k) {
  ModelFile f;
  switch (k) {
    case 1:
    case 5: f.tandem = TandemExample(0, false, false); break;
    case 2: f.tandem = TandemExample(0, false, true); break;
    case 3: f.tandem = TandemExample(0.5, true, false); break;
    case 4:
    case 6: f.tandem = TandemExample(0.6, true, false); break;
    default: throw std::invalid_argument("unknown example " + std::to_string(k));
  }
  return f;
}

}  // namespace sffm
