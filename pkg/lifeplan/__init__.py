"""
Bayesian optimal life-testing plans under the Type-II unified hybrid censoring scheme for
log-normal lifetimes.
"""

__version__ = '0.1'
