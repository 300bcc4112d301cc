"""The lifetime model and the Type-II unified hybrid censoring scheme: the stopping rule and its
simulator, expected failures and duration, and the Fisher information of the censored data."""
