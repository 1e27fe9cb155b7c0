"""
Comparing networks by infarct quantification
============================================

"""

import numpy as np

from labelscale.quantcompare import OptionThresholds, PredicateMode, build_tables, tally
from labelscale.synthetic import quant_records

# 24 manual stacks plus noisy copies for four networks;
# the last network is made more accurate than the others
rng = np.random.default_rng(11)
records = quant_records(rng, networks=("C128", "N256", "B256"), error=0.3)
records += [r for r in quant_records(np.random.default_rng(11), networks=("L256",), error=0.1)
            if r.method != "manual"]

for mode in PredicateMode:
    tables = build_tables(records, OptionThresholds(mode=mode))
    result = tally(tables)
    print(f"-- option1 predicate: {mode.value}")
    for t in tables:
        row = "  ".join(f"{m}=" + "/".join(f"{t.values[m][n]:.1f}" for n in t.networks)
                        for m in t.values)
        print(f"  {t.name}: {row}")
    print("  wins:", ", ".join(f"{n} {w}/{result.n_slots}" for n, w in result.wins.items()))
