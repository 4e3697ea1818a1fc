# Core package: graded tensors, errors, document models
