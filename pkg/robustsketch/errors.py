"""robustsketch 전역 예외 정의

모든 예외는 RobustSketchError를 상속합니다.
파라미터 검증 실패는 ValueError로도 잡을 수 있도록 다중 상속합니다.
"""


class RobustSketchError(Exception):
    """robustsketch 예외의 최상위 클래스"""


class SketchParameterError(RobustSketchError, ValueError):
    """스케치/해시/모니터 파라미터가 유효하지 않거나 인덱스가 범위를 벗어난 경우"""


class EstimateUnavailableError(RobustSketchError):
    """추정에 필요한 버킷이 없는 경우 (T_i가 비어 있음)"""


class ProtocolError(RobustSketchError):
    """오라클이 잘못된 형식의 응답을 돌려준 경우"""


class CalibrationError(RobustSketchError):
    """경계 가중치 탐색이 제한 횟수 안에 수렴하지 않은 경우"""


class SnapshotFormatError(RobustSketchError, ValueError):
    """스냅샷 바이트열의 magic/version/길이가 맞지 않는 경우"""


class ConfigError(RobustSketchError, ValueError):
    """실험 설정 오류

    Attributes:
        field_path (str): 문제가 된 설정 항목의 점 표기 경로 (예: "sketch.b")
    """

    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field_path = field_path
