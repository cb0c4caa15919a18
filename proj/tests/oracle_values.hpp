#pragma once

// Order-2 showcase pipeline (rational funnel, algebraic psi, beta = 0.9 e^{-0.4 t} + 0.1,
// k = 0.1, Gamma = 0.1, delta = 1) evaluated symbolically by tests/oracles/hadamard_n2.py.

#include <array>

namespace ppac::oracle {

struct PipelineRow {
  double x1, x2, theta_hat, t;
  double z1, z2, alpha1, dalpha1_dx1, w2_frobenius2, omega_bar2, kappa, w2, omega;
};

inline constexpr std::array<PipelineRow, 4> kShowcasePipeline{{
    {1.0, -1.0, 0.0, 0.0, 1.414213562373095, 1.5139935051131546, -2.5139935051131546, -3.1663257559653471,
     5.0128093964447633, 14.302087893476255, 10.757448644960509, 3.1663257559653471, 0.26209156883579209},
    {0.3, 0.2, 1.5, 1.0, 0.49045177883277825, 1.3559660188102273, -1.1559660188102273, -3.6627949567206638,
     5.0196691850615012, 27.589268862417382, 17.404469023739442, 1.0988384870161991, 3.4720708924413542},
    {-0.2, 0.5, 2.5, 2.5, -0.57365280461437242, -0.53592500518171925, 1.0359250051817193, -5.2207206125298957,
     3.3130092918594422, 27.064670045390511, 16.288839668624977, -1.0441441225059792, -2.5006281246758005},
    {0.05, -0.1, 3.0, 6.0, 0.29739383571653237, 0.25930079532865432, -0.35930079532865433, -7.3683454570931116,
     1.534673670178718, 55.561851704907524, 29.648262687543121, 0.3684172728546556, 2.4480286808199397},
}};

}  // namespace ppac::oracle
