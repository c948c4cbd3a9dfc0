#include "fairlr/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "fairlr/rng.hpp"

namespace fairlr {

using ordered_json = nlohmann::ordered_json;

std::string to_string(ColumnRole r) {
  switch (r) {
    case ColumnRole::continuous: return "continuous";
    case ColumnRole::categorical: return "categorical";
    case ColumnRole::label: return "label";
    case ColumnRole::sensitive: return "sensitive";
    case ColumnRole::drop: return "drop";
  }
  return "?";
}

ColumnRole column_role_from_string(const std::string& s) {
  if (s == "continuous") return ColumnRole::continuous;
  if (s == "categorical") return ColumnRole::categorical;
  if (s == "label") return ColumnRole::label;
  if (s == "sensitive") return ColumnRole::sensitive;
  if (s == "drop") return ColumnRole::drop;
  throw SchemaMismatchError("unknown column role '" + s + "'");
}

void Schema::validate() const {
  int labels = 0, sensitives = 0, features = 0;
  for (const auto& c : columns) {
    if (c.name.empty()) throw SchemaMismatchError("schema column with empty name");
    switch (c.role) {
      case ColumnRole::label: ++labels; break;
      case ColumnRole::sensitive: ++sensitives; break;
      case ColumnRole::continuous:
      case ColumnRole::categorical: ++features; break;
      case ColumnRole::drop: break;
    }
  }
  if (labels != 1) throw SchemaMismatchError("schema must declare exactly one label column");
  if (sensitives != 1)
    throw SchemaMismatchError("schema must declare exactly one sensitive column");
  if (features < 1) throw SchemaMismatchError("schema must declare at least one feature column");
  if (sensitive_match_group != 0 && sensitive_match_group != 1)
    throw SchemaMismatchError("sensitive match group must be 0 or 1");
}

std::string Schema::to_json_string() const {
  ordered_json j;
  j["format_version"] = 1;
  j["has_header"] = has_header;
  if (missing_token)
    j["missing_token"] = *missing_token;
  else
    j["missing_token"] = nullptr;
  j["positive_label"] = positive_label;
  j["sensitive"] = {{"match_value", sensitive_match}, {"match_group", sensitive_match_group}};
  j["columns"] = ordered_json::array();
  for (const auto& c : columns)
    j["columns"].push_back({{"name", c.name}, {"role", to_string(c.role)}});
  return j.dump(2) + "\n";
}

Schema Schema::from_json_string(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw SchemaMismatchError(std::string("schema is not valid JSON: ") + e.what());
  }
  Schema s;
  try {
    s.has_header = j.at("has_header").get<bool>();
    if (j.contains("missing_token") && !j["missing_token"].is_null())
      s.missing_token = j["missing_token"].get<std::string>();
    s.positive_label = j.at("positive_label").get<std::string>();
    s.sensitive_match = j.at("sensitive").at("match_value").get<std::string>();
    s.sensitive_match_group = j.at("sensitive").at("match_group").get<int>();
    for (const auto& c : j.at("columns"))
      s.columns.push_back(
          {c.at("name").get<std::string>(), column_role_from_string(c.at("role"))});
  } catch (const SchemaMismatchError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaMismatchError(std::string("schema missing field: ") + e.what());
  }
  s.validate();
  return s;
}

Schema Schema::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_string(buf.str());
}

void Schema::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write schema file " + path);
  out << to_json_string();
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

// Comma-separated fields; double quotes guard embedded commas, doubled
// quotes escape a quote. Unquoted fields are whitespace-trimmed.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

double parse_double_field(const std::string& s, std::size_t row, const std::string& col) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  double v = 0.0;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw ParseError("row " + std::to_string(row) + ", column '" + col +
                     "': cannot parse '" + s + "' as a number");
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const Schema& schema) {
  schema.validate();
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file " + path);

  std::string line;
  // column index in the file, per schema column
  std::vector<std::size_t> file_index(schema.columns.size());
  std::size_t row_number = 0;

  if (schema.has_header) {
    if (!std::getline(in, line)) throw ParseError("file " + path + " is empty");
    ++row_number;
    const auto header = split_csv_line(line);
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < header.size(); ++i) pos.emplace(header[i], i);
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
      const auto it = pos.find(schema.columns[c].name);
      if (it == pos.end())
        throw SchemaMismatchError("column '" + schema.columns[c].name + "' not in header of " +
                                  path);
      file_index[c] = it->second;
    }
  } else {
    for (std::size_t c = 0; c < schema.columns.size(); ++c) file_index[c] = c;
  }

  // Raw pass: keep the tracked fields of surviving rows; categories are
  // registered in first-appearance order so the encoding is reproducible.
  struct RawRow {
    std::vector<std::string> fields;  // one per schema column
  };
  std::vector<RawRow> rows;
  std::size_t dropped = 0;

  const std::size_t n_schema_cols = schema.columns.size();
  while (std::getline(in, line)) {
    ++row_number;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const auto fields = split_csv_line(line);
    if (!schema.has_header && fields.size() != n_schema_cols)
      throw ParseError("row " + std::to_string(row_number) + ": expected " +
                       std::to_string(n_schema_cols) + " fields, got " +
                       std::to_string(fields.size()));

    RawRow raw;
    raw.fields.resize(n_schema_cols);
    bool missing = false;
    for (std::size_t c = 0; c < n_schema_cols; ++c) {
      if (schema.columns[c].role == ColumnRole::drop) continue;
      if (file_index[c] >= fields.size())
        throw ParseError("row " + std::to_string(row_number) + ": missing column '" +
                         schema.columns[c].name + "'");
      raw.fields[c] = fields[file_index[c]];
      if (schema.missing_token && raw.fields[c] == *schema.missing_token) missing = true;
    }
    if (missing) {
      ++dropped;
      continue;
    }
    rows.push_back(std::move(raw));
  }
  if (rows.empty())
    throw EmptyAfterFilteringError("no rows left in " + path + " after dropping " +
                                   std::to_string(dropped) + " rows with missing values");

  // Category registry, first-appearance order.
  std::vector<std::vector<std::string>> categories(n_schema_cols);
  for (const auto& raw : rows) {
    for (std::size_t c = 0; c < n_schema_cols; ++c) {
      if (schema.columns[c].role != ColumnRole::categorical) continue;
      auto& cats = categories[c];
      if (std::find(cats.begin(), cats.end(), raw.fields[c]) == cats.end())
        cats.push_back(raw.fields[c]);
    }
  }

  Dataset ds;
  for (std::size_t c = 0; c < n_schema_cols; ++c) {
    const auto& col = schema.columns[c];
    if (col.role == ColumnRole::continuous) {
      ds.feature_names.push_back(col.name);
      ds.continuous.push_back(true);
    } else if (col.role == ColumnRole::categorical) {
      for (const auto& cat : categories[c]) {
        ds.feature_names.push_back(col.name + "=" + cat);
        ds.continuous.push_back(false);
      }
    }
  }
  ds.dim = ds.feature_names.size();
  ds.dropped_rows = dropped;

  std::size_t encoded_row = 0;
  ds.examples.reserve(rows.size());
  for (const auto& raw : rows) {
    ++encoded_row;
    LabeledExample ex;
    ex.features.reserve(ds.dim);
    for (std::size_t c = 0; c < n_schema_cols; ++c) {
      const auto& col = schema.columns[c];
      switch (col.role) {
        case ColumnRole::continuous:
          ex.features.push_back(parse_double_field(raw.fields[c], encoded_row, col.name));
          break;
        case ColumnRole::categorical: {
          const auto& cats = categories[c];
          for (const auto& cat : cats) ex.features.push_back(raw.fields[c] == cat ? 1.0 : 0.0);
          break;
        }
        case ColumnRole::label:
          ex.label = (raw.fields[c] == schema.positive_label) ? 1 : 0;
          break;
        case ColumnRole::sensitive: {
          const bool match = raw.fields[c] == schema.sensitive_match;
          const int g = match ? schema.sensitive_match_group : 1 - schema.sensitive_match_group;
          ex.group = g == 0 ? Group::s0 : Group::s1;
          break;
        }
        case ColumnRole::drop:
          break;
      }
    }
    ds.examples.push_back(std::move(ex));
  }

  validate_dataset(ds);
  return ds;
}

Normalizer fit_normalizer(const Dataset& train) {
  validate_dataset(train);
  Normalizer stats;
  stats.mean.assign(train.dim, 0.0);
  stats.scale.assign(train.dim, 1.0);
  const double n = static_cast<double>(train.examples.size());

  for (std::size_t j = 0; j < train.dim; ++j) {
    const bool is_cont = train.continuous.empty() ? true : bool(train.continuous[j]);
    if (!is_cont) continue;

    double lo = train.examples.front().features[j];
    double hi = lo;
    double sum = 0.0;
    for (const auto& ex : train.examples) {
      const double v = ex.features[j];
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo == hi) {
      // constant column: subtracting the exact value sends it to 0
      stats.mean[j] = lo;
      stats.scale[j] = 1e-8;
      continue;
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& ex : train.examples) {
      const double d = ex.features[j] - mean;
      ss += d * d;
    }
    const double std_pop = std::sqrt(ss / n);
    stats.mean[j] = mean;
    stats.scale[j] = std::max(std_pop, 1e-8);
  }
  return stats;
}

void normalize_row(const Normalizer& stats, std::vector<double>& features) {
  if (features.size() != stats.mean.size())
    throw DimMismatchError("row arity " + std::to_string(features.size()) +
                           " != normalizer arity " + std::to_string(stats.mean.size()));
  for (std::size_t j = 0; j < features.size(); ++j)
    features[j] = (features[j] - stats.mean[j]) / stats.scale[j];
}

Dataset apply_normalizer(const Normalizer& stats, const Dataset& ds) {
  Dataset out = ds;
  for (auto& ex : out.examples) normalize_row(stats, ex.features);
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec) {
  validate_dataset(ds);
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0))
    throw ConfigError("test fraction must be in (0,1), got " + std::to_string(spec.test_fraction));

  const std::size_t n = ds.examples.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(idx);

  std::size_t n_test = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * spec.test_fraction));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

  auto take = [&](std::size_t begin, std::size_t end) {
    Dataset part;
    part.feature_names = ds.feature_names;
    part.dim = ds.dim;
    part.continuous = ds.continuous;
    part.examples.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) part.examples.push_back(ds.examples[idx[i]]);
    return part;
  };

  Dataset train = take(0, n - n_test);
  Dataset test = take(n - n_test, n);
  try {
    validate_dataset(train);
    validate_dataset(test);
  } catch (const DataError& e) {
    throw DegenerateSplitError(std::string("a partition fails validation: ") + e.what());
  }
  return {std::move(train), std::move(test)};
}

void SynthSpec::validate() const {
  if (dim == 0) throw ConfigError("synthetic spec needs dim >= 1");
  if (n_per_group[0] < 2 || n_per_group[1] < 2)
    throw ConfigError("synthetic spec needs at least 2 examples per group");
  for (int g = 0; g < 2; ++g) {
    if (group_mean[g].size() != dim)
      throw DimMismatchError("group mean arity != dim for group " + std::to_string(g));
    for (int t = 0; t < 2; ++t)
      if (!(flip[g][t] >= 0.0 && flip[g][t] < 1.0))
        throw ConfigError("flip rates must lie in [0,1)");
  }
  if (scale.size() != dim) throw DimMismatchError("scale arity != dim");
  if (weights.size() != dim) throw DimMismatchError("weights arity != dim");
  for (double s : scale)
    if (!(s > 0.0)) throw ConfigError("scales must be positive");
}

std::string SynthSpec::to_json_string() const {
  ordered_json j;
  j["format_version"] = 1;
  j["n_per_group"] = n_per_group;
  j["dim"] = dim;
  j["group_mean"] = group_mean;
  j["scale"] = scale;
  j["weights"] = weights;
  j["flip"] = {{{"y0", flip[0][0]}, {"y1", flip[0][1]}},
               {{"y0", flip[1][0]}, {"y1", flip[1][1]}}};
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

SynthSpec SynthSpec::from_json_string(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("synthetic spec is not valid JSON: ") + e.what());
  }
  SynthSpec s;
  try {
    s.n_per_group = j.at("n_per_group").get<std::array<std::int64_t, 2>>();
    s.dim = j.at("dim").get<std::size_t>();
    const auto means = j.at("group_mean");
    s.group_mean[0] = means.at(0).get<std::vector<double>>();
    s.group_mean[1] = means.at(1).get<std::vector<double>>();
    s.scale = j.at("scale").get<std::vector<double>>();
    s.weights = j.at("weights").get<std::vector<double>>();
    for (int g = 0; g < 2; ++g) {
      s.flip[g][0] = j.at("flip").at(g).at("y0").get<double>();
      s.flip[g][1] = j.at("flip").at(g).at("y1").get<double>();
    }
    s.seed = j.at("seed").get<std::uint64_t>();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("synthetic spec missing field: ") + e.what());
  }
  s.validate();
  return s;
}

SynthSpec SynthSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open synthetic spec " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_string(buf.str());
}

SynthResult gen_synthetic(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  SynthResult out;
  Dataset& ds = out.data;
  ds.dim = spec.dim;
  for (std::size_t j = 0; j < spec.dim; ++j) {
    ds.feature_names.push_back("f" + std::to_string(j));
    ds.continuous.push_back(true);
  }

  std::array<std::int64_t, 2> n_true_pos{0, 0};
  std::array<std::int64_t, 2> n_biased_pos{0, 0};
  std::array<std::array<std::int64_t, 2>, 2> flip_count{{{0, 0}, {0, 0}}};
  std::array<std::array<std::int64_t, 2>, 2> true_count{{{0, 0}, {0, 0}}};

  for (int g = 0; g < 2; ++g) {
    for (std::int64_t i = 0; i < spec.n_per_group[g]; ++i) {
      LabeledExample ex;
      ex.group = g == 0 ? Group::s0 : Group::s1;
      ex.features.resize(spec.dim);
      double logit = 0.0;
      for (std::size_t j = 0; j < spec.dim; ++j) {
        ex.features[j] = spec.group_mean[g][j] + spec.scale[j] * rng.normal();
        logit += spec.weights[j] * ex.features[j];
      }
      const double p_true = 1.0 / (1.0 + std::exp(-logit));
      const int y_true = p_true > rng.uniform() ? 1 : 0;
      int y = y_true;
      if (rng.uniform() < spec.flip[g][y_true]) y = 1 - y_true;

      n_true_pos[g] += y_true;
      n_biased_pos[g] += y;
      ++true_count[g][y_true];
      flip_count[g][y_true] += (y != y_true) ? 1 : 0;

      ex.label = y;
      ds.examples.push_back(std::move(ex));
      out.true_labels.push_back(y_true);
    }
  }

  for (int g = 0; g < 2; ++g) {
    const double n = static_cast<double>(spec.n_per_group[g]);
    out.biased_rate[g] = static_cast<double>(n_biased_pos[g]) / n;
    out.true_rate[g] = static_cast<double>(n_true_pos[g]) / n;
    for (int t = 0; t < 2; ++t)
      out.flip_fraction[g][t] = true_count[g][t] > 0 ? static_cast<double>(flip_count[g][t]) /
                                                           static_cast<double>(true_count[g][t])
                                                     : 0.0;
  }

  validate_dataset(ds);
  return out;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_synth_csv(const SynthResult& synth, std::ostream& out) {
  const Dataset& ds = synth.data;
  for (std::size_t j = 0; j < ds.dim; ++j) out << "f" << j << ",";
  out << "y,s\n";
  for (const auto& ex : ds.examples) {
    for (double v : ex.features) out << format_double(v) << ",";
    out << ex.label << "," << static_cast<int>(group_index(ex.group)) << "\n";
  }
}

Schema synth_schema(std::size_t dim) {
  Schema s;
  for (std::size_t j = 0; j < dim; ++j)
    s.columns.push_back({"f" + std::to_string(j), ColumnRole::continuous});
  s.columns.push_back({"y", ColumnRole::label});
  s.columns.push_back({"s", ColumnRole::sensitive});
  s.has_header = true;
  s.positive_label = "1";
  s.sensitive_match = "0";
  s.sensitive_match_group = 0;
  s.validate();
  return s;
}

SensitiveAttr sensitive_attr_from_string(const std::string& s) {
  if (s == "race") return SensitiveAttr::race;
  if (s == "gender") return SensitiveAttr::gender;
  throw ConfigError("sensitive attribute must be 'race' or 'gender', got '" + s + "'");
}

std::string to_string(SensitiveAttr a) { return a == SensitiveAttr::race ? "race" : "gender"; }

Schema adult_recipe(SensitiveAttr sensitive) {
  const bool race = sensitive == SensitiveAttr::race;
  Schema s;
  s.has_header = false;  // the canonical census-income file carries no header
  s.missing_token = "?";
  s.positive_label = ">50K";
  s.columns = {
      {"age", ColumnRole::continuous},
      {"workclass", ColumnRole::categorical},
      {"fnlwgt", ColumnRole::continuous},
      {"education", ColumnRole::categorical},
      {"education-num", ColumnRole::continuous},
      {"marital-status", ColumnRole::categorical},
      {"occupation", ColumnRole::categorical},
      {"relationship", ColumnRole::categorical},
      {"race", race ? ColumnRole::sensitive : ColumnRole::drop},
      {"sex", race ? ColumnRole::drop : ColumnRole::sensitive},
      {"capital-gain", ColumnRole::continuous},
      {"capital-loss", ColumnRole::continuous},
      {"hours-per-week", ColumnRole::continuous},
      {"native-country", ColumnRole::categorical},
      {"salary", ColumnRole::label},
  };
  if (race) {
    s.sensitive_match = "White";
    s.sensitive_match_group = 1;  // group 0 = non-white
  } else {
    s.sensitive_match = "Female";
    s.sensitive_match_group = 0;
  }
  s.validate();
  return s;
}

Schema propublica_recipe(SensitiveAttr sensitive) {
  const bool race = sensitive == SensitiveAttr::race;
  Schema s;
  s.has_header = true;
  s.missing_token = "";  // empty fields count as missing
  s.positive_label = "1";
  s.columns = {
      {"age", ColumnRole::continuous},
      {"juv_fel_count", ColumnRole::continuous},
      {"juv_misd_count", ColumnRole::continuous},
      {"juv_other_count", ColumnRole::continuous},
      {"priors_count", ColumnRole::continuous},
      {"c_charge_degree", ColumnRole::categorical},
      {"race", race ? ColumnRole::sensitive : ColumnRole::drop},
      {"sex", race ? ColumnRole::drop : ColumnRole::sensitive},
      {"two_year_recid", ColumnRole::label},
  };
  if (race) {
    s.sensitive_match = "African-American";
    s.sensitive_match_group = 0;
  } else {
    s.sensitive_match = "Female";
    s.sensitive_match_group = 0;
  }
  s.validate();
  return s;
}

}  // namespace fairlr
