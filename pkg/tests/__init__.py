# cfrac-prover 测试
