# Invariant checks for the Duffin-Schaeffer lab
