"""Wind power forecasting workbench.

Builds hourly regional wind power forecasts from gridded wind-speed maps,
benchmarks reference forecasters (persistence, boosted trees on the regional
mean wind speed, convolutional and patch-attention regressors), and searches
a space of DAG-encoded neural regressors with a steady-state evolutionary
algorithm. Ships a synthetic data generator so the whole pipeline runs on a
desk without external weather or grid-operator feeds.
"""

__version__ = "0.1.0"
