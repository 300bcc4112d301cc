"""
The Bayesian design layer: the normal-gamma prior, prior-averaged design criteria, and the search
for optimal Type-II UHCS plans under a cost budget.
"""
