#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cycleforge/canonical.hpp"
#include "cycleforge/field.hpp"

namespace cycleforge::cli {

inline constexpr int kSchemaVersion = 1;

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailure = 1;
inline constexpr int kExitInputError = 2;

/// Input problem attributable to one named field; maps to exit code 2.
class InputError : public std::runtime_error {
 public:
  InputError(std::string field, const std::string& what)
      : std::runtime_error("field '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Physical oscillator parameters or one of the two canonical forms.
using ParamSet = std::variant<OscParams, CanonicalApos, CanonicalAneg>;

/// Accepts {a, b, eps} plus one of: c (6 entries) or c1..c6 (physical), d or d1..d6 (apos
/// canonical), e or e1..e9 (aneg canonical). A top-level "params" object (as written in
/// reports) is unwrapped first.
ParamSet parse_params(const nlohmann::json& j);
ParamSet load_params(const std::string& path);

nlohmann::json to_json(const ParamSet& p);

/// Parses "s,m" or "s,m,k".
std::vector<int> parse_int_list(const std::string& text, const std::string& field);
/// Parses "lo,hi" with lo < hi.
std::pair<double, double> parse_interval(const std::string& text, const std::string& field);

/// Runs the command line; the report goes to out unless --out is given, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cycleforge::cli
