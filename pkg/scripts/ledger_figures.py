"""Print the offer/confirmation diagram for every built-in timeline."""

from afshar import tiledger as tl

for name in tl.SCENARIOS:
    timeline = tl.builtin_scenario(name)
    print(f"== {name}: {tl.format_timeline(timeline)}")
    print(tl.render(tl.analyze(timeline)))
    print()
