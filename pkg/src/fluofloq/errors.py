"""fluofloqの例外と警告。"""


class FluofloqError(Exception):
    """fluofloqの数値計算で発生する例外の基本クラス。"""


class IntegrationBlowupError(FluofloqError):
    """固定ステップ積分の結果が有限値でなくなりました。"""


class FloquetDegeneracyError(FluofloqError):
    """準エネルギーが縮退しています。パラメーターを少し変えてください。"""


class SambeCutoffError(FluofloqError):
    """Sambe空間の打ち切りが収束していません。"""


class JacobiConvergenceError(FluofloqError):
    """Jacobi法が規定のスイープ数で収束しませんでした。"""


class AliasingError(FluofloqError):
    """フーリエ係数の打ち切り外に無視できないエネルギーが残っています。"""


class NoRelaxationError(FluofloqError):
    """緩和率がほぼ0のため永年近似が使えません。"""


class MonodromyConsistencyError(FluofloqError):
    """Liouville空間のモノドロミー行列に固有値1が見つかりません。"""


class CorrelationWindowError(FluofloqError):
    """相関関数が時間窓の終わりまでに減衰していません。"""

    def __init__(self, message: str, suggested_tau_max: float) -> None:
        super().__init__(message)
        self.suggested_tau_max = suggested_tau_max


class VanVleckResonanceError(FluofloqError):
    """摂動級数の分母が0になる共鳴点です。"""


class ConfigError(FluofloqError):
    """設定ファイルの検証エラー。フィールド単位のメッセージを保持します。"""

    def __init__(self, problems: list[str]) -> None:
        super().__init__("; ".join(problems))
        self.problems = list(problems)


class SecularValidityWarning(UserWarning):
    """準エネルギー差が緩和率に比べて十分大きくありません。"""


class VanVleckValidityWarning(UserWarning):
    """Van Vleck摂動論の適用条件がぎりぎり、または曖昧です。"""
