#pragma once

#include <string>
#include <vector>

namespace gk {

/// One checked identity: stable id, the identity it encodes, outcome, witness.
struct Check {
  std::string id;
  std::string anchor;
  bool pass = true;
  std::string witness;  // empty iff pass
  std::string detail;   // residual or other context on failure
};

struct Verdict {
  std::vector<Check> checks;

  bool pass() const {
    for (auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  const Check* first_failure() const {
    for (auto& c : checks)
      if (!c.pass) return &c;
    return nullptr;
  }

  const Check* find(const std::string& id) const {
    for (auto& c : checks)
      if (c.id == id) return &c;
    return nullptr;
  }

  bool failed(const std::string& id) const {
    const Check* c = find(id);
    return c && !c->pass;
  }

  Check& add(std::string id, std::string anchor, bool pass, std::string witness = {}, std::string detail = {}) {
    checks.push_back(Check{std::move(id), std::move(anchor), pass, pass ? std::string{} : std::move(witness),
                           pass ? std::string{} : std::move(detail)});
    return checks.back();
  }

  void merge(const Verdict& o) { checks.insert(checks.end(), o.checks.begin(), o.checks.end()); }
};

}  // namespace gk
