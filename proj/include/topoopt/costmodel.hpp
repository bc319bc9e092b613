#ifndef TOPOOPT_COSTMODEL_HPP
#define TOPOOPT_COSTMODEL_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace topoopt {

// Per-component prices for one link-bandwidth tier (currency units).
struct TierPrices {
  double transceiver = 0.0;
  double nic = 0.0;
  double switch_port = 0.0;
  double patch_panel_port = 0.0;
  double ocs_port = 0.0;
  double one_by_two_switch = 0.0;
};

struct PriceTable {
  std::map<int, TierPrices> tiers;  // keyed by Gbps
  double fiber_per_meter = 0.30;

  static PriceTable defaults();  // component cost table values
  const TierPrices& tier(int gbps) const;
  std::vector<int> tier_list() const;
};

enum class Architecture {
  kTopoOptPatchPanel,
  kTopoOptOcs,
  kIdealSwitch,
  kFatTreeCostEquivalent,
  kOversubFatTree,
  kExpander,
};

std::string architecture_name(Architecture a);

struct CostItem {
  std::string name;
  long long count = 0;
  double unit_price = 0.0;
  double subtotal = 0.0;
};

struct CostBreakdown {
  Architecture architecture = Architecture::kTopoOptPatchPanel;
  std::vector<CostItem> items;
  double total = 0.0;
  int fat_tree_radix = 0;      // k of the k-ary construction, when applicable
  int equivalent_tier_gbps = 0;  // B' for the cost-equivalent fat-tree

  double item_total(const std::string& name) const;
  long long item_count(const std::string& name) const;
};

// Ports of a full-bisection k-ary fat-tree (5k^3/4).
long long fat_tree_switch_ports(int k);
// Smallest supported switch radix whose fat-tree covers n hosts.
int fat_tree_radix_for(long long hosts);

// Itemized interconnect cost of one architecture. Fiber lengths draw from
// U(0, 1000) meters under fiber_seed, so comparisons are reproducible.
CostBreakdown architecture_cost(Architecture arch, int n, int d, int bandwidth_gbps,
                                const PriceTable& prices, uint64_t fiber_seed);

// Largest tier B' whose full-bisection fat-tree at per-server d*B' costs no
// more than TopoOpt at (d, B). Throws when even the lowest tier is over.
int cost_equivalent_fattree_bandwidth(int n, int d, int bandwidth_gbps,
                                      const PriceTable& prices, uint64_t fiber_seed);

}  // namespace topoopt

#endif  // TOPOOPT_COSTMODEL_HPP
