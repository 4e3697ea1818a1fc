# Fermion operators: Majorana strings, Jordan-Wigner oracle, operator diagrams, channels
