import os
import shutil
import uuid
from fastapi import UploadFile
from pathlib import Path

from app.core.config import settings


def uploads_dir() -> Path:
    return Path(settings.OUTPUT_DIR) / "uploads"


async def save_upload(file: UploadFile, folder: str = "general") -> Path:
    """
    Store an uploaded CSV under the output directory and return its path.

    Uploads get a fresh uuid name so concurrent requests never collide.
    """
    folder_path = uploads_dir() / folder
    folder_path.mkdir(parents=True, exist_ok=True)

    file_extension = os.path.splitext(file.filename)[1] if file.filename else ".csv"
    file_path = folder_path / f"{uuid.uuid4()}{file_extension}"

    with open(file_path, "wb") as buffer:
        shutil.copyfileobj(file.file, buffer)

    return file_path


async def delete_file(file_path: Path) -> bool:
    try:
        if not file_path.exists():
            return False
        os.remove(file_path)
        return True
    except OSError:
        return False
