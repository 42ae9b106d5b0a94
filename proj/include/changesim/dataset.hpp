#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "changesim/errors.hpp"

namespace changesim::mc {

// Observed columns feed analyses; Latent columns are simulation-internal and
// excluded from any analysis-facing view; Derived columns are deterministic
// composites (change scores) and are analysis-eligible.
enum class ColumnKind { Observed, Latent, Derived };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Observed;
  std::vector<double> values;
};

// Rectangular named-column sample plus provenance of how it was drawn.
class Dataset {
public:
  Dataset() = default;
  Dataset(std::string scenario_id, std::uint64_t seed, std::size_t n)
      : scenario_id_(std::move(scenario_id)), seed_(seed), n_(n) {}

  void add_column(Column col);  // enforces equal lengths and unique names

  std::size_t n_rows() const { return n_; }
  const std::vector<Column>& columns() const { return columns_; }
  bool has_column(const std::string& name) const;
  const Column& column(const std::string& name) const;  // UnknownNameError
  const std::string& scenario_id() const { return scenario_id_; }
  std::uint64_t seed() const { return seed_; }

  // Header plus rows, 17 significant digits, locale-independent. Latent
  // columns are withheld unless include_latent is set.
  std::string to_csv(bool include_latent = false) const;

  // Parses a CSV written by to_csv (or any numeric CSV with a header row).
  // All columns load as Observed: external files carry no schema flags.
  static Dataset from_csv(const std::string& text);

private:
  std::string scenario_id_;
  std::uint64_t seed_ = 0;
  std::size_t n_ = 0;
  std::vector<Column> columns_;
};

}  // namespace changesim::mc
