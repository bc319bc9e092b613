#include "topoopt/costmodel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "topoopt/error.hpp"

namespace topoopt {

PriceTable PriceTable::defaults() {
  PriceTable t;
  t.tiers[10] = TierPrices{20.0, 185.0, 94.0, 100.0, 520.0, 25.0};
  t.tiers[25] = TierPrices{39.0, 185.0, 144.0, 100.0, 520.0, 25.0};
  t.tiers[40] = TierPrices{39.0, 354.0, 144.0, 100.0, 520.0, 25.0};
  t.tiers[100] = TierPrices{99.0, 678.0, 187.0, 100.0, 520.0, 25.0};
  // 200G transceivers and switch ports priced as two 100G units.
  t.tiers[200] = TierPrices{198.0, 815.0, 374.0, 100.0, 520.0, 25.0};
  t.fiber_per_meter = 0.30;
  return t;
}

const TierPrices& PriceTable::tier(int gbps) const {
  auto it = tiers.find(gbps);
  require(it != tiers.end(), "PriceTable: unknown tier " + std::to_string(gbps) + " Gbps");
  return it->second;
}

std::vector<int> PriceTable::tier_list() const {
  std::vector<int> out;
  for (const auto& [g, p] : tiers) out.push_back(g);
  return out;
}

std::string architecture_name(Architecture a) {
  switch (a) {
    case Architecture::kTopoOptPatchPanel: return "topoopt_patch";
    case Architecture::kTopoOptOcs: return "topoopt_ocs";
    case Architecture::kIdealSwitch: return "ideal_switch";
    case Architecture::kFatTreeCostEquivalent: return "fattree_eq";
    case Architecture::kOversubFatTree: return "oversub_fattree";
    case Architecture::kExpander: return "expander";
  }
  return "unknown";
}

double CostBreakdown::item_total(const std::string& name) const {
  for (const CostItem& i : items)
    if (i.name == name) return i.subtotal;
  return 0.0;
}

long long CostBreakdown::item_count(const std::string& name) const {
  for (const CostItem& i : items)
    if (i.name == name) return i.count;
  return 0;
}

long long fat_tree_switch_ports(int k) {
  return 5LL * k * k * k / 4;
}

int fat_tree_radix_for(long long hosts) {
  // Commercial switch radixes; the smallest fabric covering the host count.
  static const int kRadixes[] = {4, 8, 12, 16, 24, 32, 48, 64};
  for (int k : kRadixes) {
    if (static_cast<long long>(k) * k * k / 4 >= hosts) return k;
  }
  throw Error("fat_tree_radix_for: more hosts than a radix-64 fat-tree supports");
}

namespace {

struct LinkRealization {
  int tier_gbps = 0;
  int lanes = 1;
};

// How a target link speed maps onto purchasable components: in-table tiers
// are used directly, gaps below the top tier snap to the nearest tier, and
// faster links are composed from parallel lanes of the largest tier.
LinkRealization realize_link(int gbps, const PriceTable& prices) {
  LinkRealization r;
  auto tiers = prices.tier_list();
  if (gbps <= tiers.back()) {
    int best = tiers.front();
    for (int t : tiers) {
      if (std::abs(t - gbps) < std::abs(best - gbps) ||
          (std::abs(t - gbps) == std::abs(best - gbps) && t > best)) {
        best = t;
      }
    }
    r.tier_gbps = best;
    r.lanes = 1;
  } else {
    r.tier_gbps = tiers.back();
    r.lanes = (gbps + tiers.back() - 1) / tiers.back();
  }
  return r;
}

double draw_fiber_total(long long count, const PriceTable& prices, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> length(0.0, 1000.0);
  double total = 0.0;
  for (long long i = 0; i < count; ++i) total += length(rng) * prices.fiber_per_meter;
  return total;
}

void push_item(CostBreakdown* b, const std::string& name, long long count, double unit) {
  CostItem item;
  item.name = name;
  item.count = count;
  item.unit_price = unit;
  item.subtotal = unit * static_cast<double>(count);
  b->items.push_back(item);
}

void push_fibers(CostBreakdown* b, long long count, const PriceTable& prices, uint64_t seed) {
  CostItem item;
  item.name = "fiber";
  item.count = count;
  item.subtotal = draw_fiber_total(count, prices, seed);
  item.unit_price = count > 0 ? item.subtotal / static_cast<double>(count) : 0.0;
  b->items.push_back(item);
}

// Full-bisection k-ary fat-tree over `hosts` endpoints: every switch port is
// bought (the fabric is fully built), the inter-switch stage is fully wired,
// and host links populate only the attached endpoints. `core_fraction`
// scales the agg-core stage (1.0 full bisection, 0.5 for 2:1 oversub).
void fat_tree_items(CostBreakdown* b, long long hosts, const LinkRealization& lr,
                    long long nic_lanes_per_host, double nic_unit,
                    const PriceTable& prices, uint64_t fiber_seed, double core_fraction) {
  const int k = fat_tree_radix_for(hosts);
  b->fat_tree_radix = k;
  const long long k3 = static_cast<long long>(k) * k * k;
  const long long host_edge = k3 / 4;
  const long long edge_agg = k3 / 4;
  const long long agg_core = static_cast<long long>(std::llround(core_fraction * (k3 / 4)));
  const long long fabric_links = edge_agg + agg_core;
  const long long switch_ports = host_edge + 2 * fabric_links;
  const TierPrices& tp = prices.tier(lr.tier_gbps);

  push_item(b, "switch_port", switch_ports * lr.lanes, tp.switch_port);
  push_item(b, "transceiver", (2 * fabric_links + 2 * hosts) * lr.lanes, tp.transceiver);
  push_item(b, "nic", static_cast<long long>(hosts) * nic_lanes_per_host, nic_unit);
  push_fibers(b, (fabric_links + hosts) * lr.lanes, prices, fiber_seed);
}

}  // namespace

CostBreakdown architecture_cost(Architecture arch, int n, int d, int bandwidth_gbps,
                                const PriceTable& prices, uint64_t fiber_seed) {
  require(n >= 1 && d >= 1, "architecture_cost: bad cluster shape");
  CostBreakdown b;
  b.architecture = arch;
  const long long nd = static_cast<long long>(n) * d;

  switch (arch) {
    case Architecture::kTopoOptPatchPanel: {
      const TierPrices& tp = prices.tier(bandwidth_gbps);
      push_item(&b, "nic", nd, tp.nic);
      push_item(&b, "transceiver", nd, tp.transceiver);
      push_item(&b, "patch_panel_port", 2 * nd, tp.patch_panel_port);
      push_item(&b, "one_by_two_switch", nd, tp.one_by_two_switch);
      push_fibers(&b, nd, prices, fiber_seed);
      break;
    }
    case Architecture::kTopoOptOcs: {
      const TierPrices& tp = prices.tier(bandwidth_gbps);
      push_item(&b, "nic", nd, tp.nic);
      push_item(&b, "transceiver", nd, tp.transceiver);
      push_item(&b, "ocs_port", nd, tp.ocs_port);
      push_fibers(&b, nd, prices, fiber_seed);
      break;
    }
    case Architecture::kExpander: {
      const TierPrices& tp = prices.tier(bandwidth_gbps);
      push_item(&b, "nic", nd, tp.nic);
      push_item(&b, "transceiver", nd, tp.transceiver);
      push_fibers(&b, nd, prices, fiber_seed);
      break;
    }
    case Architecture::kIdealSwitch: {
      // Full bisection at d*B per server, composed from d tier-B lanes.
      LinkRealization lr{bandwidth_gbps, d};
      const TierPrices& tp = prices.tier(bandwidth_gbps);
      fat_tree_items(&b, n, lr, d, tp.nic, prices, fiber_seed, 1.0);
      break;
    }
    case Architecture::kFatTreeCostEquivalent: {
      const int bprime =
          cost_equivalent_fattree_bandwidth(n, d, bandwidth_gbps, prices, fiber_seed);
      b.equivalent_tier_gbps = bprime;
      const LinkRealization lr = realize_link(d * bprime, prices);
      const double nic_unit = prices.tier(lr.tier_gbps).nic;
      fat_tree_items(&b, n, lr, lr.lanes, nic_unit, prices, fiber_seed, 1.0);
      break;
    }
    case Architecture::kOversubFatTree: {
      LinkRealization lr{bandwidth_gbps, d};
      const TierPrices& tp = prices.tier(bandwidth_gbps);
      fat_tree_items(&b, n, lr, d, tp.nic, prices, fiber_seed, 0.5);
      break;
    }
  }

  b.total = 0.0;
  for (const CostItem& i : b.items) b.total += i.subtotal;
  return b;
}

int cost_equivalent_fattree_bandwidth(int n, int d, int bandwidth_gbps,
                                      const PriceTable& prices, uint64_t fiber_seed) {
  const CostBreakdown topoopt = architecture_cost(Architecture::kTopoOptPatchPanel, n, d,
                                                  bandwidth_gbps, prices, fiber_seed);
  int best = 0;
  for (int tier : prices.tier_list()) {
    CostBreakdown ft;
    ft.architecture = Architecture::kFatTreeCostEquivalent;
    const LinkRealization lr = realize_link(d * tier, prices);
    const double nic_unit = prices.tier(lr.tier_gbps).nic;
    fat_tree_items(&ft, n, lr, lr.lanes, nic_unit, prices, fiber_seed, 1.0);
    ft.total = 0.0;
    for (const CostItem& i : ft.items) ft.total += i.subtotal;
    if (ft.total <= topoopt.total && tier > best) best = tier;
  }
  require(best > 0, "cost_equivalent_fattree_bandwidth: no tier fits the budget");
  return best;
}

}  // namespace topoopt
