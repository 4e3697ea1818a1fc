# Bosonization tensor networks on cubic lattices
