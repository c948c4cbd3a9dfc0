#pragma once
// Dataset ingestion: schema-driven CSV loading with one-hot encoding,
// z-score normalization, seeded splitting, recipes for the two bundled
// dataset layouts, and a synthetic biased-label generator used as a
// ground-truth oracle in tests and experiments.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fairlr/core.hpp"

namespace fairlr {

enum class ColumnRole : std::uint8_t { continuous, categorical, label, sensitive, drop };

std::string to_string(ColumnRole r);
ColumnRole column_role_from_string(const std::string& s);

struct SchemaColumn {
  std::string name;
  ColumnRole role = ColumnRole::drop;
};

// Column mapping for a CSV file. Exactly one label column and one sensitive
// column; at least one feature column. When has_header is false the columns
// are positional and every file column must be declared. When has_header is
// true, header columns not named in the schema are ignored.
struct Schema {
  std::vector<SchemaColumn> columns;
  bool has_header = true;
  std::optional<std::string> missing_token;  // nullopt disables row dropping
  std::string positive_label;                // label value mapped to y=1
  std::string sensitive_match;               // sensitive value compared against
  int sensitive_match_group = 0;             // group assigned on match; complement otherwise

  void validate() const;

  std::string to_json_string() const;
  static Schema from_json_string(const std::string& text);
  static Schema load(const std::string& path);
  void save(const std::string& path) const;
};

Dataset load_csv(const std::string& path, const Schema& schema);

// Per-encoded-column statistics fitted on a training split. Non-continuous
// columns carry mean 0 / scale 1 and pass through unchanged.
struct Normalizer {
  std::vector<double> mean;
  std::vector<double> scale;
};

Normalizer fit_normalizer(const Dataset& train);
Dataset apply_normalizer(const Normalizer& stats, const Dataset& ds);
void normalize_row(const Normalizer& stats, std::vector<double>& features);

struct SplitSpec {
  double test_fraction = 0.3;
  std::uint64_t seed = 0;
};

// Seeded uniform shuffle, then the last round(n * test_fraction) examples
// form the test split. Both partitions must pass validate_dataset.
std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec);

// Generative story for the synthetic oracle: per group, features are drawn
// from a diagonal Gaussian, the latent label is Bernoulli(sigmoid(<x,w>)),
// and the observed label flips the latent one with a per-(group, latent)
// rate. Known flip rates make the biased acceptance rates predictable.
struct SynthSpec {
  std::array<std::int64_t, 2> n_per_group{500, 500};
  std::size_t dim = 2;
  std::array<std::vector<double>, 2> group_mean;  // length dim each
  std::vector<double> scale;                      // shared diagonal, length dim
  std::vector<double> weights;                    // latent-label model, length dim
  // flip[g][t] = P(y != ybar_true | ybar_true = t, s = g)
  std::array<std::array<double, 2>, 2> flip{{{0.0, 0.0}, {0.0, 0.0}}};
  std::uint64_t seed = 0;

  void validate() const;

  std::string to_json_string() const;
  static SynthSpec from_json_string(const std::string& text);
  static SynthSpec load(const std::string& path);
};

struct SynthResult {
  Dataset data;
  std::vector<int> true_labels;             // latent labels, same order as data.examples
  std::array<double, 2> biased_rate{};      // realized P(y=1|s)
  std::array<double, 2> true_rate{};        // realized P(ybar_true=1|s)
  std::array<std::array<double, 2>, 2> flip_fraction{};  // realized flip[g][t]
};

SynthResult gen_synthetic(const SynthSpec& spec);

// Writes the biased dataset as CSV (f0..f{d-1}, y, s) compatible with
// synth_schema(); used by the synth command and round-trip tests.
void write_synth_csv(const SynthResult& synth, std::ostream& out);
Schema synth_schema(std::size_t dim);

enum class SensitiveAttr : std::uint8_t { race, gender };

SensitiveAttr sensitive_attr_from_string(const std::string& s);
std::string to_string(SensitiveAttr a);

// Column mappings for the two bundled dataset layouts. The census-income
// file is headerless with 15 positional columns; household income above the
// threshold maps to y=1, race=White maps to group 1 (so group 0 is
// non-white), sex=Female maps to group 0. The recidivism file is headered;
// two-year recidivism maps to y=1 and race=African-American maps to group 0.
// Both sensitive columns are excluded from the feature set regardless of
// which one is active.
Schema adult_recipe(SensitiveAttr sensitive);
Schema propublica_recipe(SensitiveAttr sensitive);

}  // namespace fairlr
