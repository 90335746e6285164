#pragma once

#include "ccirc/scenario.hpp"

namespace ccirc {

struct attack_scenario {
   std::string name;
   std::string description;
   scenario sc;
   bool expect_safety_violation = true;
};

/// Serial composition over a head chain that produces no certificates: the
/// carrier loses safety and routes conflicting head forks to different
/// clients, neither of which is detectable without certificates.
attack_scenario make_serial_no_certificates_attack();

/// The three-world partial-synchrony argument instantiated against a
/// 3-chain triangular circuit claiming safety from s3 safe chains: the
/// common live chain splits, each half serving one client's world.
/// Requires ind(l1) & ind(l2) & ind(s3) empty, k = 3.
attack_scenario make_three_worlds_attack(const bit_vector& l1, const bit_vector& l2,
                                         const bit_vector& s3);

/// The two-chain parallel counterexample: both chains safe but stalled
/// towards opposite clients; each client follows "its" live-looking chain.
attack_scenario make_naive_parallel_attack();

/// Synchronous converse worlds against a parallel gate claiming safety
/// from safety alone: one safe non-live chain splits its audience.
attack_scenario make_sync_converse_attack();

std::vector<attack_scenario> attack_library();

}  // namespace ccirc
