"""Bayesian and frequentist UCB bandits with finite-time Bayes regret bounds."""

__version__ = "0.1.0"
