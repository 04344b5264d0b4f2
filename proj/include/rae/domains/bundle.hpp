#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

#include "rae/domain.hpp"
#include "rae/problem.hpp"
#include "rae/rng.hpp"

namespace rae {

struct UnknownDomain : std::runtime_error {
  explicit UnknownDomain(const std::string& what) : std::runtime_error(what) {}
};

namespace domains {

/// A ready-to-run domain: registered declarations plus its random
/// problem generator. Immutable after build; shareable.
struct DomainBundle {
  std::string name;
  std::shared_ptr<Domain> domain;
  /// Deterministic per seed; difficulty 0 generates no exogenous events.
  std::function<ProblemInstance(std::uint64_t seed, int difficulty)> gen_problem;
};

}  // namespace domains
}  // namespace rae
