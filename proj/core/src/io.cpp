#include "drlqg/io.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "drlqg/error.hpp"

namespace drlqg {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::kParse, "field '" + path + "': " + what);
}

json parse_document(const std::string& text, const char* format) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t end = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i + 1 < end; ++i) line += text[i] == '\n' ? 1 : 0;
    throw Error(ErrorKind::kParse, "line " + std::to_string(line) + ": " + e.what());
  }
  if (!doc.is_object()) schema_error("<root>", "expected an object");
  if (!doc.contains("format") || doc["format"] != format) {
    schema_error("format", std::string("expected \"") + format + "\"");
  }
  if (!doc.contains("version") || doc["version"] != kFormatVersion) {
    schema_error("version", "expected " + std::to_string(kFormatVersion));
  }
  return doc;
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) schema_error(path + key, "missing");
  return obj[key];
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  return j.get<double>();
}

long long integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) schema_error(path, "expected an integer");
  return j.get<long long>();
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const std::vector<Matrix>& ms) {
  json out = json::array();
  for (const auto& m : ms) out.push_back(to_json(m));
  return out;
}

Matrix matrix_from(const json& j, const std::string& path, Eigen::Index rows,
                   Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    schema_error(path, "expected an array of " + std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[i];
    const std::string rp = path + "[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      schema_error(rp, "expected a row of " + std::to_string(cols) + " numbers");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(i, c) = number(row[c], rp + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

std::vector<Matrix> matrices_from(const json& j, const std::string& path,
                                  std::size_t count, Eigen::Index rows,
                                  Eigen::Index cols) {
  if (!j.is_array() || j.size() != count) {
    schema_error(path, "expected an array of " + std::to_string(count) + " matrices");
  }
  std::vector<Matrix> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(matrix_from(j[k], path + "[" + std::to_string(k) + "]", rows, cols));
  }
  return out;
}

std::vector<double> reals_from(const json& j, const std::string& path, std::size_t count) {
  if (!j.is_array() || j.size() != count) {
    schema_error(path, "expected an array of " + std::to_string(count) + " numbers");
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(number(j[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

struct Dims {
  Eigen::Index n, m, p;
  int T;
};

Dims dims_from(const json& doc) {
  const json& d = field(doc, "dims", "");
  Dims out{};
  out.n = integer(field(d, "n", "dims."), "dims.n");
  out.m = integer(field(d, "m", "dims."), "dims.m");
  out.p = integer(field(d, "p", "dims."), "dims.p");
  out.T = static_cast<int>(integer(field(d, "T", "dims."), "dims.T"));
  if (out.n < 1 || out.m < 1 || out.p < 1 || out.T < 1) {
    schema_error("dims", "all dimensions must be >= 1");
  }
  return out;
}

json dims_json(Eigen::Index n, Eigen::Index m, Eigen::Index p, int T) {
  return json{{"n", n}, {"m", m}, {"p", p}, {"T", T}};
}

json covariance_json(const CovarianceProfile& cov) {
  return json{{"X0", to_json(cov.X0)}, {"W", to_json(cov.W)}, {"V", to_json(cov.V)}};
}

CovarianceProfile covariance_from(const json& obj, const std::string& prefix,
                                  const Dims& d) {
  CovarianceProfile cov;
  cov.X0 = matrix_from(field(obj, "X0", prefix), prefix + "X0", d.n, d.n);
  cov.W = matrices_from(field(obj, "W", prefix), prefix + "W", d.T, d.n, d.n);
  cov.V = matrices_from(field(obj, "V", prefix), prefix + "V", d.T, d.p, d.p);
  return cov;
}

}  // namespace

std::string serialize_instance(const Instance& inst) {
  const auto& sys = inst.system;
  const auto& amb = inst.ambiguity;
  json doc;
  doc["format"] = "drlqg-instance";
  doc["version"] = kFormatVersion;
  doc["dims"] = dims_json(sys.n(), sys.m(), sys.p(), sys.horizon());
  if (inst.recipe) {
    doc["generator"] = json{{"recipe", inst.recipe->name},
                            {"seed", inst.recipe->seed},
                            {"rho", inst.recipe->rho},
                            {"rng", "mt19937_64"}};
  }
  doc["system"] = json{{"A", to_json(sys.A)}, {"B", to_json(sys.B)},
                       {"C", to_json(sys.C)}, {"Q", to_json(sys.Q)},
                       {"R", to_json(sys.R)}};
  doc["ambiguity"] = json{{"rho_x0", amb.rho_x0}, {"rho_w", amb.rho_w},
                          {"rho_v", amb.rho_v}};
  doc["nominal"] = covariance_json(amb.nominal);
  return doc.dump(2) + "\n";
}

Instance parse_instance(const std::string& text) {
  const json doc = parse_document(text, "drlqg-instance");
  const Dims d = dims_from(doc);
  Instance inst;
  const json& s = field(doc, "system", "");
  auto& sys = inst.system;
  sys.A = matrices_from(field(s, "A", "system."), "system.A", d.T, d.n, d.n);
  sys.B = matrices_from(field(s, "B", "system."), "system.B", d.T, d.n, d.m);
  sys.C = matrices_from(field(s, "C", "system."), "system.C", d.T, d.p, d.n);
  sys.Q = matrices_from(field(s, "Q", "system."), "system.Q", d.T + 1, d.n, d.n);
  sys.R = matrices_from(field(s, "R", "system."), "system.R", d.T, d.m, d.m);

  const json& a = field(doc, "ambiguity", "");
  auto& amb = inst.ambiguity;
  amb.rho_x0 = number(field(a, "rho_x0", "ambiguity."), "ambiguity.rho_x0");
  amb.rho_w = reals_from(field(a, "rho_w", "ambiguity."), "ambiguity.rho_w", d.T);
  amb.rho_v = reals_from(field(a, "rho_v", "ambiguity."), "ambiguity.rho_v", d.T);
  amb.nominal = covariance_from(field(doc, "nominal", ""), "nominal.", d);

  if (doc.contains("generator")) {
    const json& g = doc["generator"];
    GeneratorRecipe r;
    const json& name = field(g, "recipe", "generator.");
    if (!name.is_string()) schema_error("generator.recipe", "expected a string");
    r.name = name.get<std::string>();
    const json& seed = field(g, "seed", "generator.");
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
      schema_error("generator.seed", "expected an unsigned integer");
    }
    r.seed = seed.get<std::uint64_t>();
    r.rho = number(field(g, "rho", "generator."), "generator.rho");
    inst.recipe = r;
  }
  inst.validate();
  return inst;
}

std::string serialize_covariance(const CovarianceProfile& cov) {
  json doc = covariance_json(cov);
  doc["format"] = "drlqg-covariance";
  doc["version"] = kFormatVersion;
  doc["dims"] = json{{"n", cov.X0.rows()},
                     {"p", cov.V.empty() ? 0 : cov.V.front().rows()},
                     {"T", cov.horizon()}};
  return doc.dump(2) + "\n";
}

CovarianceProfile parse_covariance(const std::string& text) {
  const json doc = parse_document(text, "drlqg-covariance");
  const json& dj = field(doc, "dims", "");
  Dims d{};
  d.n = integer(field(dj, "n", "dims."), "dims.n");
  d.p = integer(field(dj, "p", "dims."), "dims.p");
  d.T = static_cast<int>(integer(field(dj, "T", "dims."), "dims.T"));
  if (d.n < 1 || d.p < 1 || d.T < 1) schema_error("dims", "all dimensions must be >= 1");
  return covariance_from(doc, "", d);
}

ControllerFile controller_file(const KalmanController& ctrl) {
  return {ctrl.riccati.K, ctrl.kalman.L, unroll_kalman(ctrl)};
}

std::string serialize_controller(const ControllerFile& ctrl) {
  DRLQG_THROW_UNLESS(!ctrl.K.empty() && ctrl.K.size() == ctrl.L.size(),
                     ErrorKind::kInvalidInput, "controller gains are inconsistent");
  json doc;
  doc["format"] = "drlqg-controller";
  doc["version"] = kFormatVersion;
  const int T = static_cast<int>(ctrl.K.size());
  doc["dims"] = dims_json(ctrl.K.front().cols(), ctrl.K.front().rows(),
                          ctrl.L.front().cols(), T);
  doc["K"] = to_json(ctrl.K);
  doc["L"] = to_json(ctrl.L);
  doc["U_output"] = to_json(ctrl.output.U.dense());
  json q = json::array();
  for (Eigen::Index i = 0; i < ctrl.output.q.size(); ++i) q.push_back(ctrl.output.q(i));
  doc["q_output"] = std::move(q);
  return doc.dump(2) + "\n";
}

ControllerFile parse_controller(const std::string& text) {
  const json doc = parse_document(text, "drlqg-controller");
  const Dims d = dims_from(doc);
  ControllerFile out;
  out.K = matrices_from(field(doc, "K", ""), "K", d.T, d.m, d.n);
  out.L = matrices_from(field(doc, "L", ""), "L", d.T, d.n, d.p);
  const Matrix u = matrix_from(field(doc, "U_output", ""), "U_output", d.m * d.T, d.p * d.T);
  try {
    out.output.U = BlockLowerTriangular::from_dense(u, d.T, d.m, d.p);
  } catch (const Error& e) {
    schema_error("U_output", e.what());
  }
  const auto q = reals_from(field(doc, "q_output", ""), "q_output",
                            static_cast<std::size_t>(d.m * d.T));
  out.output.q = Eigen::Map<const Vector>(q.data(), static_cast<Eigen::Index>(q.size()));
  return out;
}

KalmanController controller_from_file(const TimeVaryingSystem& sys,
                                      const ControllerFile& file) {
  sys.validate();
  const int T = sys.horizon();
  DRLQG_THROW_UNLESS(static_cast<int>(file.K.size()) == T &&
                         static_cast<int>(file.L.size()) == T,
                     ErrorKind::kDimensionMismatch,
                     "controller horizon does not match the instance");
  for (int t = 0; t < T; ++t) {
    DRLQG_THROW_UNLESS(file.K[t].rows() == sys.m() && file.K[t].cols() == sys.n() &&
                           file.L[t].rows() == sys.n() && file.L[t].cols() == sys.p(),
                       ErrorKind::kDimensionMismatch,
                       "controller gain shapes do not match the instance");
  }
  KalmanController ctrl;
  ctrl.system = sys;
  ctrl.riccati.K = file.K;
  ctrl.kalman.L = file.L;
  return ctrl;
}

std::string serialize_summary(const SolveSummary& s) {
  json doc;
  doc["format"] = "drlqg-summary";
  doc["version"] = kFormatVersion;
  doc["status"] = to_string(s.status);
  doc["iterations"] = s.iterations;
  doc["final_gap"] = s.final_gap;
  doc["f_value"] = s.f_value;
  doc["config"] = json{{"delta", s.config.delta},
                       {"tol", s.config.tol},
                       {"max_iter", s.config.max_iter}};
  return doc.dump(2) + "\n";
}

SolveSummary parse_summary(const std::string& text) {
  const json doc = parse_document(text, "drlqg-summary");
  SolveSummary s;
  const json& status = field(doc, "status", "");
  if (status == "converged") {
    s.status = SolveStatus::kConverged;
  } else if (status == "max_iterations") {
    s.status = SolveStatus::kMaxIterations;
  } else {
    schema_error("status", "expected \"converged\" or \"max_iterations\"");
  }
  s.iterations = static_cast<int>(integer(field(doc, "iterations", ""), "iterations"));
  s.final_gap = number(field(doc, "final_gap", ""), "final_gap");
  s.f_value = number(field(doc, "f_value", ""), "f_value");
  const json& c = field(doc, "config", "");
  s.config.delta = number(field(c, "delta", "config."), "config.delta");
  s.config.tol = number(field(c, "tol", "config."), "config.tol");
  s.config.max_iter = static_cast<int>(integer(field(c, "max_iter", "config."), "config.max_iter"));
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  DRLQG_THROW_UNLESS(in.good(), ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    DRLQG_THROW_UNLESS(out.good(), ErrorKind::kIo, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    DRLQG_THROW_UNLESS(out.good(), ErrorKind::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  DRLQG_THROW_UNLESS(!ec, ErrorKind::kIo,
                     "cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace drlqg
