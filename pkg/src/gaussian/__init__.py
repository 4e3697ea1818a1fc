# Gaussian package: Pfaffians, Gaussian and number-conserving tensors
