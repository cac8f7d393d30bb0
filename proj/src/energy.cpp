#include "tldram/energy.hpp"

#include <algorithm>

namespace tldram {

void EnergyLedger::charge(const Command& cmd, const DeviceGeometry& geometry,
                          const CalibrationAnchors& anchors) {
    if (activations_per_tier.size() < geometry.tier_count())
        activations_per_tier.resize(geometry.tier_count(), 0);
    switch (cmd.kind) {
        case CommandKind::ACT: {
            uint32_t tier = geometry.tier_of_row(cmd.row);
            activation_energy += power_of_tier(geometry, tier, anchors);
            ++activations_per_tier[tier];
            break;
        }
        case CommandKind::MIG: {
            uint32_t tier = std::max(geometry.tier_of_row(cmd.row), geometry.tier_of_row(cmd.row2));
            migration_energy += power_of_tier(geometry, tier, anchors);
            break;
        }
        case CommandKind::RD:
        case CommandKind::WR:
            rdwr_energy += rdwr_cost;
            break;
        case CommandKind::PRE:
            break;
    }
}

EnergyLedger& EnergyLedger::operator+=(const EnergyLedger& other) {
    activation_energy += other.activation_energy;
    migration_energy += other.migration_energy;
    rdwr_energy += other.rdwr_energy;
    if (activations_per_tier.size() < other.activations_per_tier.size())
        activations_per_tier.resize(other.activations_per_tier.size(), 0);
    for (size_t i = 0; i < other.activations_per_tier.size(); ++i)
        activations_per_tier[i] += other.activations_per_tier[i];
    return *this;
}

std::optional<double> savings_vs(const EnergyLedger& ledger, const EnergyLedger& baseline) {
    double b = baseline.total();
    if (b <= 0) return std::nullopt;
    return (b - ledger.total()) / b;
}

}  // namespace tldram
