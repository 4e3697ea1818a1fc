# Calculus package: generators, diagrams, rule catalog, rewriter
