#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dirikit {

struct Check {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
  std::optional<std::string> detail;
};

/// Named checks with residuals and their accepted bounds. The verdict is the
/// conjunction of all pass flags; names are unique within a report.
class VerificationReport {
 public:
  void add(Check check) {
    if (find(check.name)) throw std::logic_error("duplicate check name '" + check.name + "'");
    checks_.push_back(std::move(check));
  }

  Check& add(std::string name, double residual, double tol, std::optional<std::string> detail = std::nullopt) {
    add(Check{std::move(name), residual, tol, residual <= tol, std::move(detail)});
    return checks_.back();
  }

  /// Merges another report, prefixing its check names.
  void merge(const VerificationReport& other, const std::string& prefix) {
    for (const auto& c : other.checks_) {
      Check copy = c;
      copy.name = prefix + c.name;
      add(std::move(copy));
    }
    for (const auto& [k, v] : other.values_) values_[prefix + k] = v;
  }

  bool verdict() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.pass; });
  }

  const std::vector<Check>& checks() const { return checks_; }

  const Check* find(const std::string& name) const {
    auto it = std::find_if(checks_.begin(), checks_.end(), [&](const Check& c) { return c.name == name; });
    return it == checks_.end() ? nullptr : &*it;
  }

  const Check& at(const std::string& name) const {
    const Check* c = find(name);
    if (!c) throw std::out_of_range("no check named '" + name + "'");
    return *c;
  }

  // Derived quantities worth reporting alongside the checks (beta, h range, ...).
  void set_value(const std::string& key, double v) { values_[key] = v; }
  const std::map<std::string, double>& values() const { return values_; }
  double value(const std::string& key) const { return values_.at(key); }

 private:
  std::vector<Check> checks_;
  std::map<std::string, double> values_;
};

}  // namespace dirikit
