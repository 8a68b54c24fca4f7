# tests.core 模块
