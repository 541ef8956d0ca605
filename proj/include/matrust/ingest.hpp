#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "matrust/trust_core.hpp"

namespace matrust {

/// Categorical trust level -> numeric rating. Keys are stored lower-cased and
/// matched case-insensitively.
class LevelMap {
 public:
  LevelMap() = default;

  /// Observer 0.1, Apprentice 0.4, Journeyer 0.7, Master 0.9.
  static LevelMap advogato();

  /// Parses "observer=0.1,apprentice=0.4,...". Throws ValidationError.
  static LevelMap parse(std::string_view spec);

  void set(std::string_view label, double rating);
  std::optional<double> lookup(std::string_view label) const;
  const std::map<std::string, double>& entries() const { return levels_; }

 private:
  std::map<std::string, double> levels_;
};

/// Thrown for a malformed edge-list line; carries the 1-based line number.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads `trustor<TAB>trustee<TAB>value` lines. Values are decimals in [0,1]
/// or level labels resolved through `levels`. Blank lines and lines starting
/// with '#' are skipped; an optional first line starting with "trustor" is
/// treated as a header. User ids are assigned dense indices in order of
/// first appearance and kept as labels.
SparseTrustMatrix parse_edge_list(std::istream& in, const std::optional<LevelMap>& levels = {});

/// Writes the observations as TSV with full-precision ratings. Uses labels
/// when the matrix has them, bare indices otherwise.
void write_edge_list(const SparseTrustMatrix& t, std::ostream& out);

/// Model container failures.
class ModelFormatError : public IoError {
 public:
  enum class Kind { kVersionMismatch, kTruncated, kChecksum, kInvalid };
  ModelFormatError(Kind kind, const std::string& what) : IoError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr std::string_view kModelMagic = "MATRUST\0";
inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Binary container: magic, version, n, r, alpha, mu, x, y, F0, G0 (row-major),
/// user labels, CRC-32 of all preceding bytes. Little-endian IEEE-754 doubles,
/// so load_model(save_model(m)) is bit-exact.
void save_model(const FactorModel& model, std::ostream& out);
FactorModel load_model(std::istream& in);

void save_model_file(const FactorModel& model, const std::string& path);
FactorModel load_model_file(const std::string& path);

}  // namespace matrust
