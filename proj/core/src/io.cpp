#include "svfreg/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace svfreg {

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

namespace {

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const std::string& path) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ParseError(path + ": truncated file");
  return value;
}

void expect_magic(std::ifstream& in, const char* magic, const std::string& path) {
  char buf[4];
  in.read(buf, 4);
  if (!in || std::memcmp(buf, magic, 4) != 0)
    throw ParseError(path + ": bad magic, expected " + magic);
}

}  // namespace

void save_grid_field(const std::string& path, const GridField& field) {
  field.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write("SVF1", 4);
  write_raw(out, static_cast<std::uint32_t>(field.V));
  write_raw(out, static_cast<std::uint32_t>(3));
  std::vector<float> buf(field.data.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(field.data[i]);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw IoError("failed writing '" + path + "'");
}

GridField load_grid_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open grid field file '" + path + "'");
  expect_magic(in, "SVF1", path);
  const auto v = read_raw<std::uint32_t>(in, path);
  const auto d = read_raw<std::uint32_t>(in, path);
  if (d != 3) throw ParseError(path + ": unsupported field dimension " + std::to_string(d));
  if (v < 2 || v > 4096) throw ParseError(path + ": implausible grid size " + std::to_string(v));
  GridField field(static_cast<int>(v));
  std::vector<float> buf(field.data.size());
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!in) throw ParseError(path + ": truncated field data");
  for (std::size_t i = 0; i < buf.size(); ++i) field.data[i] = buf[i];
  field.validate();
  return field;
}

void save_pdm_model(const std::string& path, const PdmModel& model) {
  model.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write("PDM1", 4);
  write_raw(out, static_cast<std::uint32_t>(model.V));
  write_raw(out, static_cast<std::uint32_t>(model.component_count()));
  write_raw(out, static_cast<std::uint64_t>(model.n_samples));
  auto write_doubles = [&](const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  write_doubles(model.mean);
  write_doubles(model.eigenvalues);
  write_doubles(model.components);
  if (!out) throw IoError("failed writing '" + path + "'");
}

PdmModel load_pdm_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  expect_magic(in, "PDM1", path);
  const auto v = read_raw<std::uint32_t>(in, path);
  const auto k = read_raw<std::uint32_t>(in, path);
  const auto n = read_raw<std::uint64_t>(in, path);
  if (v < 2 || v > 4096) throw ParseError(path + ": implausible grid size");
  PdmModel model;
  model.V = static_cast<int>(v);
  model.n_samples = n;
  const std::size_t dim = 3 * static_cast<std::size_t>(v) * v * v;
  auto read_doubles = [&](std::vector<double>& dst, std::size_t count) {
    dst.resize(count);
    in.read(reinterpret_cast<char*>(dst.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw ParseError(path + ": truncated model data");
  };
  read_doubles(model.mean, dim);
  read_doubles(model.eigenvalues, k);
  read_doubles(model.components, static_cast<std::size_t>(k) * dim);
  double retained = 0.0;
  for (double ev : model.eigenvalues) retained += ev;
  model.total_variance = retained;  // residual variance is not persisted
  model.validate();
  return model;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

RegistrationConfig RunConfig::to_registration_config() const {
  RegistrationConfig cfg;
  cfg.grid_size = grid_size;
  cfg.objective.loss = loss;
  cfg.objective.reg.lambda1 = resolved_lambda1();
  cfg.objective.reg.lambda2 = lambda2;
  cfg.objective.reg.lambda3 = lambda3;
  cfg.objective.sinkhorn.epsilon = sinkhorn_epsilon;
  cfg.objective.sinkhorn.p = sinkhorn_p;
  cfg.objective.sinkhorn.max_iterations = sinkhorn_max_iterations;
  cfg.objective.sinkhorn.tolerance = sinkhorn_tolerance;
  if (sinkhorn_cost == "powered-euclidean")
    cfg.objective.sinkhorn.cost = SinkhornConfig::Cost::powered_euclidean;
  else if (sinkhorn_cost == "p-norm")
    cfg.objective.sinkhorn.cost = SinkhornConfig::Cost::p_norm;
  else
    throw ParseError("sinkhorn_cost must be 'powered-euclidean' or 'p-norm'");
  cfg.objective.kernel.size = kernel_size;
  cfg.objective.kernel.sigma = kernel_sigma;
  cfg.objective.squaring_steps = squaring_steps;
  cfg.adam.learning_rate = adam_learning_rate;
  cfg.adam.beta1 = adam_beta1;
  cfg.adam.beta2 = adam_beta2;
  cfg.adam.eps_hat = adam_eps_hat;
  cfg.adam.max_iterations = adam_max_iterations;
  cfg.adam.stop_tolerance = adam_stop_tolerance;
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(path + ": config must be a JSON object");

  RunConfig cfg;
  auto take = [&](const char* key) -> std::optional<nlohmann::json> {
    auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    nlohmann::json v = *it;
    j.erase(it);
    return v;
  };
  try {
    if (auto v = take("loss")) cfg.loss = loss_kind_from_string(v->get<std::string>());
    if (auto v = take("lambda1")) cfg.lambda1 = v->get<double>();
    if (auto v = take("lambda2")) cfg.lambda2 = v->get<double>();
    if (auto v = take("lambda3")) cfg.lambda3 = v->get<double>();
    if (auto v = take("sinkhorn_epsilon")) cfg.sinkhorn_epsilon = v->get<double>();
    if (auto v = take("sinkhorn_p")) cfg.sinkhorn_p = v->get<double>();
    if (auto v = take("sinkhorn_max_iterations"))
      cfg.sinkhorn_max_iterations = v->get<int>();
    if (auto v = take("sinkhorn_tolerance")) cfg.sinkhorn_tolerance = v->get<double>();
    if (auto v = take("sinkhorn_cost")) cfg.sinkhorn_cost = v->get<std::string>();
    if (auto v = take("grid_size")) cfg.grid_size = v->get<int>();
    if (auto v = take("squaring_steps")) cfg.squaring_steps = v->get<int>();
    if (auto v = take("kernel_size")) cfg.kernel_size = v->get<int>();
    if (auto v = take("kernel_sigma")) cfg.kernel_sigma = v->get<double>();
    if (auto v = take("adam_learning_rate")) cfg.adam_learning_rate = v->get<double>();
    if (auto v = take("adam_beta1")) cfg.adam_beta1 = v->get<double>();
    if (auto v = take("adam_beta2")) cfg.adam_beta2 = v->get<double>();
    if (auto v = take("adam_eps_hat")) cfg.adam_eps_hat = v->get<double>();
    if (auto v = take("adam_max_iterations")) cfg.adam_max_iterations = v->get<int>();
    if (auto v = take("adam_stop_tolerance")) cfg.adam_stop_tolerance = v->get<double>();
    if (auto v = take("sample_count")) cfg.sample_count = v->get<int>();
    if (auto v = take("seed")) cfg.seed = v->get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.empty())
    throw ParseError(path + ": unknown config key '" + j.begin().key() + "'");
  return cfg;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace svfreg
