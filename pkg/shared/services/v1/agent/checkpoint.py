"""
Двоичный формат чекпоинта Q-сети.

Little-endian: магия b"TRLQ", u32 версия, u32 размеры входа, скрытого
слоя и выхода, затем W1, b1, W2, b2 как float64 построчно.
"""

import struct
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from shared.core.exceptions import CheckpointError, OutputError

from .network import PARAMETER_NAMES, QNetwork

MAGIC = b"TRLQ"
VERSION = 1
HEADER = struct.Struct("<4sIIII")


def encode_checkpoint(net: QNetwork) -> bytes:
    n_in, n_hidden, n_out = net.dims
    body = b"".join(
        np.ascontiguousarray(getattr(net, name), dtype="<f8").tobytes()
        for name in PARAMETER_NAMES
    )
    return HEADER.pack(MAGIC, VERSION, n_in, n_hidden, n_out) + body


def decode_checkpoint(
    data: bytes, path: str = "<memory>", expected_dims: Optional[Tuple[int, int, int]] = None
) -> QNetwork:
    """
    Восстанавливает сеть из байтов чекпоинта.

    Raises:
        CheckpointError: Неверная магия, версия, размеры или длина файла.
    """
    if len(data) < HEADER.size:
        raise CheckpointError("файл короче заголовка", path)
    magic, version, n_in, n_hidden, n_out = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError(f"неверная сигнатура {magic!r}", path)
    if version != VERSION:
        raise CheckpointError(f"неподдерживаемая версия {version}", path)
    if expected_dims is not None and (n_in, n_hidden, n_out) != tuple(expected_dims):
        raise CheckpointError(
            f"размеры {(n_in, n_hidden, n_out)} не совпадают с ожидаемыми {tuple(expected_dims)}",
            path,
        )

    shapes = [(n_hidden, n_in), (n_hidden,), (n_out, n_hidden), (n_out,)]
    sizes = [int(np.prod(shape)) for shape in shapes]
    if len(data) != HEADER.size + 8 * sum(sizes):
        raise CheckpointError("длина файла не совпадает с размерами сети", path)

    values = np.frombuffer(data, dtype="<f8", offset=HEADER.size).astype(float)
    arrays, offset = [], 0
    for shape, size in zip(shapes, sizes):
        arrays.append(values[offset : offset + size].reshape(shape).copy())
        offset += size
    return QNetwork(*arrays)


def save_checkpoint(net: QNetwork, path: Path) -> None:
    """
    Raises:
        OutputError: Файл не удалось записать.
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(encode_checkpoint(net))
    except OSError as e:
        raise OutputError(str(path), str(e)) from e


def load_checkpoint(
    path: Path, expected_dims: Optional[Tuple[int, int, int]] = None
) -> QNetwork:
    try:
        data = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"не удалось прочитать файл: {e}", str(path)) from e
    return decode_checkpoint(data, str(path), expected_dims)
