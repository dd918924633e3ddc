#include "evsi/pa_data.hpp"

#include "evsi/error.hpp"
#include "evsi/stats.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace evsi {
namespace {

constexpr std::string_view kModule = "pa-data";
constexpr std::string_view kParamPrefix = "param.";
constexpr std::string_view kNbPrefix = "nb.";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

void append_double(std::string& out, double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 17);
  out.append(buf.data(), ptr);
}

}  // namespace

PaDataset::PaDataset(Eigen::MatrixXd theta, Eigen::MatrixXd nb,
                     std::vector<std::string> param_names,
                     std::vector<std::string> decision_names)
    : theta_(std::move(theta)),
      nb_(std::move(nb)),
      param_names_(std::move(param_names)),
      decision_names_(std::move(decision_names)) {
  constexpr std::string_view op = "PaDataset";
  if (theta_.rows() != nb_.rows())
    throw ShapeError(kModule, op, "theta and nb row counts differ");
  if (theta_.rows() < 2) throw ShapeError(kModule, op, "need at least 2 rows");
  if (theta_.cols() < 1) throw ShapeError(kModule, op, "need at least 1 parameter");
  if (nb_.cols() < 2) throw ShapeError(kModule, op, "need at least 2 decisions");
  if (static_cast<Index>(param_names_.size()) != theta_.cols() ||
      static_cast<Index>(decision_names_.size()) != nb_.cols())
    throw ShapeError(kModule, op, "name count does not match column count");
  if (!theta_.allFinite() || !nb_.allFinite())
    throw ParseError(kModule, op, "non-finite entry");
}

Index PaDataset::param_index(const std::string& name) const {
  const auto it = std::find(param_names_.begin(), param_names_.end(), name);
  if (it == param_names_.end())
    throw IndexError(kModule, "param_index", "no parameter named '" + name + "'");
  return static_cast<Index>(it - param_names_.begin());
}

PaDataset read_pa_dataset(std::istream& in) {
  constexpr std::string_view op = "load_pa_dataset";
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(kModule, op, "missing header row");

  const auto header = split_commas(line);
  std::vector<std::string> param_names, decision_names;
  std::vector<std::pair<bool, Index>> column_target;  // (is_param, index)
  std::set<std::string> seen;
  for (const auto cell : header) {
    const std::string name(cell);
    if (!seen.insert(name).second)
      throw SchemaError(kModule, op, "duplicate column '" + name + "'");
    if (name.starts_with(kParamPrefix) && name.size() > kParamPrefix.size()) {
      column_target.emplace_back(true, static_cast<Index>(param_names.size()));
      param_names.push_back(name.substr(kParamPrefix.size()));
    } else if (name.starts_with(kNbPrefix) && name.size() > kNbPrefix.size()) {
      column_target.emplace_back(false, static_cast<Index>(decision_names.size()));
      decision_names.push_back(name.substr(kNbPrefix.size()));
    } else {
      throw SchemaError(kModule, op,
                        "column '" + name + "' lacks a param. or nb. prefix");
    }
  }
  if (param_names.empty()) throw SchemaError(kModule, op, "no param. columns");
  if (decision_names.empty()) throw SchemaError(kModule, op, "no nb. columns");

  std::vector<std::vector<double>> rows;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row_no;
    const auto cells = split_commas(line);
    if (cells.size() != header.size())
      throw ParseError(kModule, op,
                       "row " + std::to_string(row_no) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(header.size()));
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto cell = cells[c];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
        throw ParseError(kModule, op,
                         "row " + std::to_string(row_no) + ", column '" +
                             std::string(header[c]) + "': invalid value '" +
                             std::string(cell) + "'");
      values[c] = v;
    }
    rows.push_back(std::move(values));
  }

  const auto m = static_cast<Index>(rows.size());
  Eigen::MatrixXd theta(m, static_cast<Index>(param_names.size()));
  Eigen::MatrixXd nb(m, static_cast<Index>(decision_names.size()));
  for (Index i = 0; i < m; ++i) {
    for (std::size_t c = 0; c < column_target.size(); ++c) {
      const auto [is_param, j] = column_target[c];
      (is_param ? theta : nb)(i, j) = rows[static_cast<std::size_t>(i)][c];
    }
  }
  return PaDataset(std::move(theta), std::move(nb), std::move(param_names),
                   std::move(decision_names));
}

PaDataset load_pa_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(kModule, "load_pa_dataset", "cannot open " + path.string());
  return read_pa_dataset(in);
}

void write_pa_dataset(const PaDataset& pa, std::ostream& out) {
  std::string buf;
  bool first = true;
  auto sep = [&] {
    if (!first) buf += ',';
    first = false;
  };
  for (const auto& n : pa.param_names()) sep(), buf += "param." + n;
  for (const auto& n : pa.decision_names()) sep(), buf += "nb." + n;
  buf += '\n';
  for (Index i = 0; i < pa.rows(); ++i) {
    first = true;
    for (Index j = 0; j < pa.params(); ++j) sep(), append_double(buf, pa.theta()(i, j));
    for (Index d = 0; d < pa.decisions(); ++d) sep(), append_double(buf, pa.nb()(i, d));
    buf += '\n';
  }
  out << buf;
}

void save_pa_dataset(const PaDataset& pa, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(kModule, "save_pa_dataset", "cannot write " + path.string());
  write_pa_dataset(pa, out);
}

IncrementalBenefitSamples incremental_nb(const PaDataset& pa, Index reference) {
  if (reference < 0 || reference >= pa.decisions())
    throw IndexError(kModule, "incremental_nb",
                     "reference decision " + std::to_string(reference) +
                         " out of range");
  IncrementalBenefitSamples out;
  out.reference = reference;
  out.inb.resize(pa.rows(), pa.decisions() - 1);
  Index col = 0;
  for (Index d = 0; d < pa.decisions(); ++d) {
    if (d == reference) continue;
    out.inb.col(col++) = pa.nb().col(d) - pa.nb().col(reference);
  }
  return out;
}

Moments prior_moments(std::span<const double> samples) {
  if (samples.size() < 2)
    throw InsufficientDataError(kModule, "prior_moments", "need at least 2 samples");
  return {mean_of(samples), sample_variance(samples)};
}

std::string to_string(LikelihoodFamily family) {
  switch (family) {
    case LikelihoodFamily::gaussian: return "gaussian";
    case LikelihoodFamily::bernoulli: return "bernoulli";
    case LikelihoodFamily::poisson: return "poisson";
    case LikelihoodFamily::binomial: return "binomial";
    case LikelihoodFamily::exponential: return "exponential";
    case LikelihoodFamily::custom: return "custom";
  }
  return "custom";
}

LikelihoodFamily likelihood_family_from_string(const std::string& name) {
  for (auto f : {LikelihoodFamily::gaussian, LikelihoodFamily::bernoulli,
                 LikelihoodFamily::poisson, LikelihoodFamily::binomial,
                 LikelihoodFamily::exponential, LikelihoodFamily::custom}) {
    if (to_string(f) == name) return f;
  }
  throw SchemaError(kModule, "likelihood_family", "unknown family '" + name + "'");
}

void DataCollectionSpec::validate(Index param_count) const {
  constexpr std::string_view op = "DataCollectionSpec";
  const auto j = focal_indices.size();
  if (j == 0) throw ValidationError(kModule, op, "no focal parameters");
  if (mu0.size() != j || sigma2.size() != j || n0.size() != j)
    throw ValidationError(kModule, op, "mu0/sigma2/n0 must have one entry per focal parameter");
  std::set<Index> distinct(focal_indices.begin(), focal_indices.end());
  if (distinct.size() != j) throw ValidationError(kModule, op, "focal indices repeat");
  for (auto idx : focal_indices)
    if (idx < 0 || idx >= param_count)
      throw ValidationError(kModule, op, "focal index " + std::to_string(idx) + " out of range");
  if (likelihood.family == LikelihoodFamily::binomial && likelihood.trials < 1)
    throw ValidationError(kModule, op, "binomial trials must be >= 1");
  for (std::size_t k = 0; k < j; ++k) {
    if (!(n0[k] > 0.0) || !std::isfinite(n0[k]))
      throw ValidationError(kModule, op, "n0 must be positive");
    if (!(sigma2[k] > 0.0) || !std::isfinite(sigma2[k]))
      throw ValidationError(kModule, op, "sigma2 must be positive");
    if (!std::isfinite(mu0[k])) throw ValidationError(kModule, op, "mu0 must be finite");
    const bool unit_interval = likelihood.family == LikelihoodFamily::bernoulli ||
                               likelihood.family == LikelihoodFamily::binomial;
    if (unit_interval && !(mu0[k] > 0.0 && mu0[k] < 1.0))
      throw ValidationError(kModule, op, "mu0 must lie in (0, 1) for bernoulli/binomial");
  }
}

std::string DataCollectionSpec::digest() const {
  std::string canon = to_string(likelihood.family) + ":" + std::to_string(likelihood.trials);
  for (std::size_t k = 0; k < focal_indices.size(); ++k) {
    canon += "|" + std::to_string(focal_indices[k]) + ",";
    append_double(canon, mu0[k]);
    canon += ",";
    append_double(canon, sigma2[k]);
    canon += ",";
    append_double(canon, n0[k]);
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

Eigen::MatrixXd focal_columns(const PaDataset& pa, std::span<const Index> focal) {
  Eigen::MatrixXd out(pa.rows(), static_cast<Index>(focal.size()));
  for (std::size_t k = 0; k < focal.size(); ++k) {
    if (focal[k] < 0 || focal[k] >= pa.params())
      throw IndexError(kModule, "focal_columns", "focal index out of range");
    out.col(static_cast<Index>(k)) = pa.theta().col(focal[k]);
  }
  return out;
}

}  // namespace evsi
