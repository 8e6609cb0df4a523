"""
异常定义 - 每类错误携带 CLI 退出码
"""
from typing import Any, Optional


class LabError(Exception):
    """所有可预期错误的基类，exit_code 对应 CLI 退出码"""
    exit_code = 2

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class UsageError(LabError):
    """参数或配置非法（消息需点名字段）"""
    exit_code = 1


class DataFormatError(UsageError):
    """输入文件格式错误"""

    def __init__(self, detail: str, path: Optional[str] = None, line: Optional[int] = None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + detail)
        self.path = path
        self.line = line


class DomainError(LabError, ValueError):
    """数学定义域错误"""


class ComputeError(LabError):
    """计算无法完成（截断未到达、内存上限、窗口退化）"""


class ConvergenceError(ComputeError):
    """迭代未收敛，partial 保存已收敛的部分结果"""

    def __init__(self, detail: str, partial: Any = None):
        super().__init__(detail)
        self.partial = partial


class VerificationError(LabError):
    """恒等式校验未通过"""
    exit_code = 3
