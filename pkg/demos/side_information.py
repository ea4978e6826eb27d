"""Decide whether side information preserves the channel's structure.

When the side information only informs the path parameters, the random phases
stay independent of it and the conditional covariance keeps its Toeplitz
shape.  When it observes the channel itself, a trail from the phases opens up.
"""

from chanstat import BayesNet, SideInfoRoles, classify_side_info, d_separated

sensing = BayesNet(edges=[("z", "Xi"), ("z", "H"), ("Xi", "H"), ("beta", "H")])
observing = BayesNet(edges=[("Xi", "H"), ("beta", "H"), ("H", "z")])

for name, bn in (("sensing", sensing), ("observing", observing)):
    result = classify_side_info(bn, SideInfoRoles())
    print(f"{name:>9}: {result.kind}")
    for trail in result.trails:
        print(f"           open trail {trail}")

# the collider at H blocks beta from Xi until H (or a descendant) is observed
print("beta _|_ Xi          :", d_separated(observing, {"beta"}, {"Xi"}))
print("beta _|_ Xi given z  :", d_separated(observing, {"beta"}, {"Xi"}, {"z"}))
