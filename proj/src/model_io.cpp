#include "effdyn/model_io.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "effdyn/errors.hpp"
#include "effdyn/geometry.hpp"

namespace effdyn {

namespace {

constexpr const char* kHeader = "effdyn-model v1";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(std::istream& in, const char* what) {
  double v;
  if (!(in >> v)) throw ConfigError(std::string("model file: expected ") + what);
  return v;
}

long parse_long(std::istream& in, const char* what) {
  long v;
  if (!(in >> v)) throw ConfigError(std::string("model file: expected ") + what);
  return v;
}

}  // namespace

std::string model_to_string(const EffectiveModel& model) {
  std::ostringstream out;
  out << kHeader << "\n";
  out << "m " << model.m << "\n";
  for (int d = 0; d < model.grid.dim(); ++d) {
    const auto& axis = model.grid.axis(d);
    out << "axis " << d << " " << axis.size() << " " << fmt(axis.front()) << " "
        << fmt(axis.back()) << "\n";
  }
  out << "nodes " << model.grid.size() << "\n";
  for (long k = 0; k < model.grid.size(); ++k) {
    out << k << " " << static_cast<int>(model.missing[k]) << " "
        << model.count[k] << " " << fmt(model.Q[k]);
    for (int i = 0; i < model.m; ++i) out << " " << fmt(model.b[k][i]);
    for (int i = 0; i < model.m; ++i)
      for (int j = i; j < model.m; ++j)
        out << " " << fmt(model.sigma_node[k](i, j));
    out << "\n";
  }
  return out.str();
}

EffectiveModel model_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader)
    throw ConfigError("model file: bad or missing version header");

  std::string tag;
  EffectiveModel model;
  if (!(in >> tag) || tag != "m")
    throw ConfigError("model file: expected dimension entry");
  in >> model.m;
  if (model.m < 1) throw ConfigError("model file: invalid dimension");

  Vec lo(model.m), hi(model.m);
  std::vector<int> counts(model.m);
  for (int d = 0; d < model.m; ++d) {
    int axis_id = 0;
    if (!(in >> tag) || tag != "axis")
      throw ConfigError("model file: expected axis entry");
    in >> axis_id;
    counts[d] = static_cast<int>(parse_long(in, "axis node count"));
    lo[d] = parse_double(in, "axis lo");
    hi[d] = parse_double(in, "axis hi");
  }
  model.grid = ZGrid(lo, hi, counts);

  if (!(in >> tag) || tag != "nodes")
    throw ConfigError("model file: expected node count");
  const long total = parse_long(in, "node count");
  if (total != model.grid.size())
    throw ConfigError("model file: node count disagrees with the grid");

  model.b.assign(total, Vec::Zero(model.m));
  model.phi_mean.assign(total, Mat::Zero(model.m, model.m));
  model.sigma_node.assign(total, Mat::Zero(model.m, model.m));
  model.Q.assign(total, 0.0);
  model.count.assign(total, 0);
  model.missing.assign(total, 0);

  for (long row = 0; row < total; ++row) {
    const long k = parse_long(in, "node index");
    if (k < 0 || k >= total) throw ConfigError("model file: node index range");
    model.missing[k] = static_cast<char>(parse_long(in, "missing flag"));
    model.count[k] = parse_long(in, "sample count");
    model.Q[k] = parse_double(in, "Q");
    for (int i = 0; i < model.m; ++i)
      model.b[k][i] = parse_double(in, "drift entry");
    for (int i = 0; i < model.m; ++i) {
      for (int j = i; j < model.m; ++j) {
        const double v = parse_double(in, "sigma entry");
        model.sigma_node[k](i, j) = v;
        model.sigma_node[k](j, i) = v;
      }
    }
    model.phi_mean[k] = model.sigma_node[k] * model.sigma_node[k];
  }
  return model;
}

void save_model(const EffectiveModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open model file for writing: " + path);
  out << model_to_string(model);
}

EffectiveModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return model_from_string(buffer.str());
}

void export_model_csv(const EffectiveModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open CSV file for writing: " + path);
  for (int d = 0; d < model.m; ++d) out << "z" << d + 1 << ",";
  for (int d = 0; d < model.m; ++d) out << "b" << d + 1 << ",";
  for (int i = 0; i < model.m; ++i)
    for (int j = i; j < model.m; ++j) out << "sigma" << i + 1 << j + 1 << ",";
  out << "Q,count,missing\n";
  for (long k = 0; k < model.grid.size(); ++k) {
    const Vec z = model.grid.node(k);
    for (int d = 0; d < model.m; ++d) out << fmt(z[d]) << ",";
    for (int d = 0; d < model.m; ++d) out << fmt(model.b[k][d]) << ",";
    for (int i = 0; i < model.m; ++i)
      for (int j = i; j < model.m; ++j)
        out << fmt(model.sigma_node[k](i, j)) << ",";
    out << fmt(model.Q[k]) << "," << model.count[k] << ","
        << static_cast<int>(model.missing[k]) << "\n";
  }
}

}  // namespace effdyn
