# Exact and Monte Carlo tools for the Duffin-Schaeffer lab
