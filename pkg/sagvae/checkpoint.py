"""체크포인트 저장/로드 모듈

체크포인트는 하나의 .npz 컨테이너입니다.

- 파라미터마다 ``named_parameters`` 이름을 키로 하는 little-endian float64 ('<f8') 배열
- ``__config__``: ModelConfig JSON 문자열 (0차원 유니코드 배열)
- ``__meta__``: 에폭, 시드 등 부가 정보 JSON 문자열

Checkpoint container: a single .npz with one '<f8' array per named parameter,
``__config__`` holding the ModelConfig JSON and ``__meta__`` holding run metadata.
Saving then loading restores every parameter bit for bit.
"""

import json
import zipfile
from pathlib import Path
from typing import Any

import numpy as np
import torch
from pydantic import ValidationError

from sagvae.autodiff import DTYPE
from sagvae.errors import CheckpointFormatError
from sagvae.model import SAGVAE
from sagvae.models.config import ModelConfig
from utils import Logger

logger = Logger(__name__)

CONFIG_KEY = "__config__"
META_KEY = "__meta__"


def save_checkpoint(model: SAGVAE, path: str | Path, meta: dict[str, Any] | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = {
        name: param.detach().cpu().numpy().astype("<f8")
        for name, param in model.named_parameters()
    }
    arrays[CONFIG_KEY] = np.array(model.config.model_dump_json())
    arrays[META_KEY] = np.array(json.dumps(meta or {}, sort_keys=True))
    # 파일 핸들로 저장해야 np.savez가 확장자를 덧붙이지 않습니다
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as f:
        np.savez(f, **arrays)
    tmp.replace(path)
    logger.debug(f"checkpoint written: {path}")
    return path


def load_checkpoint(path: str | Path) -> tuple[SAGVAE, dict[str, Any]]:
    """체크포인트에서 모델과 메타데이터를 복원합니다.

    Restore a model and its metadata.

    Raises:
        CheckpointFormatError: 컨테이너가 손상되었거나 파라미터 이름/형태가 맞지 않는 경우
        FileNotFoundError: 파일이 없는 경우
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    try:
        with np.load(path, allow_pickle=False) as data:
            arrays = {key: data[key] for key in data.files}
    except (ValueError, OSError, zipfile.BadZipFile) as e:
        raise CheckpointFormatError(f"cannot read checkpoint {path}: {e}")

    if CONFIG_KEY not in arrays:
        raise CheckpointFormatError(f"checkpoint {path} has no `{CONFIG_KEY}` entry.")
    try:
        config = ModelConfig.model_validate_json(str(arrays.pop(CONFIG_KEY)[()]))
    except ValidationError as e:
        raise CheckpointFormatError(f"checkpoint {path} carries an invalid model config: {e}")
    meta = json.loads(str(arrays.pop(META_KEY)[()])) if META_KEY in arrays else {}

    model = SAGVAE(config)
    expected = dict(model.named_parameters())
    if set(expected) != set(arrays):
        missing = sorted(set(expected) - set(arrays))
        unexpected = sorted(set(arrays) - set(expected))
        raise CheckpointFormatError(f"checkpoint parameters differ (missing={missing}, unexpected={unexpected}).")
    with torch.no_grad():
        for name, param in expected.items():
            value = arrays[name]
            if value.shape != tuple(param.shape):
                raise CheckpointFormatError(
                    f"parameter `{name}` has shape {value.shape}, model expects {tuple(param.shape)}."
                )
            param.copy_(torch.from_numpy(value.astype("<f8")).to(DTYPE))
    return model, meta
