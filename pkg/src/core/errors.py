"""
异常定义模块
实验室各模块共用的异常类型
"""


class IsoparError(Exception):
    """实验室异常基类"""


class InputError(IsoparError):
    """输入不合法：维数不符、系数非单位、符号长度错误等"""


class DegenerateMultiplicityError(InputError):
    """重数退化：m2 = l - m - 1 < 1"""


class FocalVarietyError(IsoparError):
    """点不在焦簇上，或谱不聚集于期望值"""


class InvalidNormalError(IsoparError):
    """法向量不合法，特征空间正交化后维数不符"""


class SamplingError(IsoparError):
    """采样失败：牛顿投影不收敛或所有符号组合都塌缩"""
