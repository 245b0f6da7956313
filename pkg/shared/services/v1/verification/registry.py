import logging
import time
from dataclasses import dataclass
from typing import Callable, List, Optional

from shared.core.exceptions import PreconditionError
from shared.core.settings import SimSettings

logger = logging.getLogger("app.verify")


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


# Проверка возвращает (успех, пояснение)
Check = Callable[[SimSettings], "tuple[bool, str]"]

# Список проверок в порядке регистрации
checks: List[Check] = []


def register_check(check: Check) -> Check:
    """Регистрирует проверку для команды verify"""
    checks.append(check)
    return check


def run_checks(settings: SimSettings, only: Optional[List[str]] = None) -> List[CheckResult]:
    """
    Запускает зарегистрированные проверки.

    Исключение внутри проверки считается провалом этой проверки,
    остальные проверки выполняются.

    Raises:
        PreconditionError: В only есть имя, которого нет среди проверок.
    """
    if only:
        unknown = sorted(set(only) - {check.__name__ for check in checks})
        if unknown:
            raise PreconditionError(
                f"неизвестные проверки: {', '.join(unknown)}", extra={"names": unknown}
            )
    results = []
    for check in checks:
        if only and check.__name__ not in only:
            continue
        logger.info(f"Запуск проверки: {check.__name__}")
        started = time.perf_counter()
        try:
            passed, detail = check(settings)
        except Exception as e:
            logger.error(f"Ошибка в проверке {check.__name__}: {str(e)}")
            passed, detail = False, f"{type(e).__name__}: {e}"
        results.append(CheckResult(check.__name__, passed, detail, time.perf_counter() - started))
    return results
