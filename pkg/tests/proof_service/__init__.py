# tests.proof_service 模块
