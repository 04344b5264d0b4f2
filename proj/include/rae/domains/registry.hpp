#pragma once

#include <string>

#include "rae/domains/bundle.hpp"
#include "rae/domains/fetch.hpp"
#include "rae/domains/nav.hpp"
#include "rae/domains/snr.hpp"
#include "rae/domains/toy.hpp"

namespace rae::domains {

inline DomainBundle build(const std::string& name) {
  if (name == "toy") return build_toy();
  if (name == "toy2") return build_toy2();
  if (name == "snr") return build_snr();
  if (name == "nav") return build_nav();
  if (name == "fetch") return build_fetch();
  throw UnknownDomain("unknown domain: " + name);
}

inline ProblemInstance gen_problem(const DomainBundle& bundle, std::uint64_t seed, int difficulty) {
  return bundle.gen_problem(seed, difficulty);
}

}  // namespace rae::domains
