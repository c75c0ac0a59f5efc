import json
import logging
from pathlib import Path
from typing import Union

import numpy as np
from pydantic import ValidationError

from opmean.utils.exceptions import ExceptionMatrixFile, OpmeanException
from opmean.v1._shared.custom_schemas import MatrixPayload
from opmean.v1._shared.schemas import HermitianMatrix

logger = logging.getLogger(__name__)


def matrix_to_payload(matrix: HermitianMatrix) -> MatrixPayload:
    entries = matrix.entries
    return MatrixPayload(
        dim=matrix.dim,
        re=np.real(entries).tolist(),
        im=np.imag(entries).tolist() if matrix.is_complex else None,
    )


def payload_to_matrix(payload: MatrixPayload) -> HermitianMatrix:
    entries = np.asarray(payload.re, dtype=float)
    if payload.im is not None:
        entries = entries + 1j * np.asarray(payload.im, dtype=float)
    return HermitianMatrix(entries=entries)


def load_matrix(path: Union[str, Path]) -> HermitianMatrix:
    """
    Reads a matrix file {"dim": n, "re": [[...]], "im": [[...]]}.

    Args:
        path: JSON file; "im" may be omitted for real matrices

    Returns:
        HermitianMatrix, symmetrized
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ExceptionMatrixFile(str(path), e.strerror or str(e))
    try:
        payload = MatrixPayload.model_validate_json(text)
    except ValidationError as e:
        raise ExceptionMatrixFile(str(path), f"{e.error_count()} validation error(s): {e.errors()[0]['msg']}")
    try:
        matrix = payload_to_matrix(payload)
    except OpmeanException as e:
        raise ExceptionMatrixFile(str(path), e.detail)
    logger.debug(f"Matrix loaded from {path}: dim={matrix.dim}")
    return matrix


def save_matrix(matrix: HermitianMatrix, path: Union[str, Path]) -> None:
    path = Path(path)
    path.write_text(json.dumps(matrix_to_payload(matrix).model_dump(exclude_none=True)), encoding="utf-8")
    logger.info(f"Matrix saved to {path}")


def write_text(path: Union[str, Path], content: str) -> None:
    """Writes a report, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8")
    logger.info(f"Report saved to {path}")
