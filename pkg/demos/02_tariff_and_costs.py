"""Price one day of operation by hand with the finance toolbox.

Shows the cost pieces the optimizer trades off: annualized equipment
payments, TOU energy charges, the monthly demand charge, battery wear and
the islanded lost-load penalties.
"""

import numpy as np

from dersizer import (DeviceCatalog, TariffPlan, capital_recovery_factor,
                      catalog_from_capital_costs, demand_charge, energy_charge,
                      investment_cost, shedding_cost)

print(f"CRF at 10% over 10 years: {capital_recovery_factor(0.10, 10):.6f}")
raw = catalog_from_capital_costs({"pv": 1000.0, "es": 2600.0}, rate=0.10, years=10)
print(f"$1000/kW PV capital -> {raw.c_pv:.1f} $/kW-yr annualized")

catalog = DeviceCatalog()  # published annualized prices pass through untouched
capacities = {"pv": 400, "es": 350, "ic": 199, "inv": 350, "con": 624}
print(f"annual investment at a cap-sized DER deployment: "
      f"{investment_cost(capacities, catalog):,.1f} $/yr")

tariff = TariffPlan.default_tou()
print(f"TOU prices: off-peak {tariff.energy_price.min()}, "
      f"peak {tariff.energy_price.max()} $/kWh, demand {tariff.demand_price} $/kW")

hours = np.arange(24)
purchases = 500 + 250 * np.exp(-0.5 * ((hours - 15) / 3.0) ** 2)
day_energy = energy_charge(purchases, tariff)
day_demand = demand_charge(purchases.max(), tariff)
print(f"one day: energy charge {day_energy:,.2f} $, "
      f"demand charge {day_demand:,.2f} $ on a {purchases.max():.0f} kW peak")
print(f"annualized: {365 * day_energy:,.0f} $/yr energy, "
      f"{12 * day_demand:,.0f} $/yr demand (monthly billing convention)")

critical, noncritical = shedding_cost([10.0], [0.0], [40.0], [0.0], catalog)
print(f"shedding 10 kWh critical + 40 kWh non-critical in one islanded hour: "
      f"{critical + noncritical:,.0f} $")
