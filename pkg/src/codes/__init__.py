# Majorana stabilizer code and its Floquet circuit
