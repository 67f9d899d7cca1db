"""How the scenario batch size scales with the accuracy knobs.

Two laws govern the cost of the noise bounds: the batch size is linear
in 1/nu (the tolerated violation level) and only logarithmic in 1/kappa
(the confidence level) and in the iteration counter.  Tightening
confidence is nearly free; tightening the violation level is not.
"""

from safebo import scaling_study

print("== linear in the inverse violation level (kappa=1e-3, t=1) ==")
rows = scaling_study([0.2, 0.1, 0.05, 0.025], [1e-3], [1], [1])
base = None
for row in rows:
    m = row["min_scenarios"]
    note = "" if base is None else f"  (x{m / base:.2f} vs previous)"
    base = m
    print(f"  nu={row['violation_prob']:<6} -> {m:5d} scenarios{note}")

print("\n== logarithmic in the confidence level (nu=0.1, t=1) ==")
prev = None
for row in scaling_study([0.1], [1e-2, 1e-3, 1e-4, 1e-5, 1e-6], [1], [1]):
    m = row["min_scenarios"]
    note = "" if prev is None else f"  (+{m - prev} per decade)"
    prev = m
    print(f"  kappa={row['confidence_level']:<7} -> {m:5d} scenarios{note}")

print("\n== benign growth along iterations (nu=0.1, kappa=1e-3) ==")
for row in scaling_study([0.1], [1e-3], [1], [1, 10, 100, 1000, 10000]):
    print(f"  t={row['iteration']:<6} -> {row['min_scenarios']:5d} scenarios")

print("\n== more outputs cost a little more (nu=0.1, t=1) ==")
for row in scaling_study([0.1], [1e-3], [1, 2, 3, 4], [1]):
    print(f"  outputs={row['n_outputs']} -> {row['min_scenarios']:5d} scenarios")
