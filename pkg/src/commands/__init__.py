"""
子命令 - 每个模块提供 register(subparsers, parents)，由 main 统一注册
"""
