#pragma once

#include "xlre/solver.hpp"

namespace testing {

// The five reference configurations used throughout the tests.
inline xlre::ProblemSpec figure(int k) {
  using xlre::ClaimDistribution;
  xlre::ProblemSpec p;
  p.delta = 0.5;
  p.a = 0.3;
  p.line1.kappa = 4;
  p.line2.kappa = 2;
  p.line1.claims = ClaimDistribution::uniform(1.0);
  p.line2.claims = ClaimDistribution::uniform(1.5);
  switch (k) {
    case 1: p.line1.cbar = 3; p.line2.cbar = 2; break;
    case 2: p.line1.cbar = 3; p.line2.cbar = 1; break;
    case 3: p.line1.cbar = 1; p.line2.cbar = 0.5; break;
    case 4: p.mode = xlre::DividendMode::Unbounded; break;
    case 5:
      p.mode = xlre::DividendMode::Unbounded;
      p.line1.claims = ClaimDistribution::exponential(1.0);
      p.line2.claims = ClaimDistribution::exponential(1.5);
      break;
  }
  return p;
}

inline xlre::AggregateModel figure_model(int k) { return xlre::normalize(figure(k)).model; }

}  // namespace testing
