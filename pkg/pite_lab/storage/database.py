import json
from datetime import datetime, timezone
from functools import lru_cache
from pathlib import Path
from typing import Optional

from sqlmodel import Field, Session, SQLModel, create_engine, select

from pite_lab.config import settings
from pite_lab.storage.files import to_jsonable


# --- Models ---

class RunRecord(SQLModel, table=True):
    id: Optional[int] = Field(default=None, primary_key=True)
    command: str = Field(index=True)
    config: str  # JSON
    seed: int = 0
    created_at: str = Field(index=True)
    summary: str = "{}"  # JSON
    output_path: Optional[str] = None

    @property
    def config_dict(self) -> dict:
        return json.loads(self.config)

    @property
    def summary_dict(self) -> dict:
        return json.loads(self.summary)


# --- Database setup ---

def get_engine(url: str | None = None):
    return _engine_for(url or settings.database_url)


@lru_cache(maxsize=None)
def _engine_for(url: str):
    if url.startswith("sqlite:///") and url != "sqlite:///:memory:":
        Path(url.removeprefix("sqlite:///")).parent.mkdir(parents=True, exist_ok=True)
    engine = create_engine(url, echo=False)
    SQLModel.metadata.create_all(engine)
    return engine


def record_run(
    command: str,
    config: dict,
    seed: int,
    summary: dict | None = None,
    output_path: Path | None = None,
    url: str | None = None,
) -> RunRecord:
    record = RunRecord(
        command=command,
        config=json.dumps(to_jsonable(config), sort_keys=True),
        seed=seed,
        created_at=datetime.now(timezone.utc).isoformat(),
        summary=json.dumps(to_jsonable(summary or {}), sort_keys=True),
        output_path=str(output_path) if output_path else None,
    )
    with Session(get_engine(url)) as session:
        session.add(record)
        session.commit()
        session.refresh(record)
    return record


def list_runs(command: str | None = None, url: str | None = None) -> list[RunRecord]:
    with Session(get_engine(url)) as session:
        stmt = select(RunRecord).order_by(RunRecord.id)
        if command:
            stmt = stmt.where(RunRecord.command == command)
        return list(session.exec(stmt).all())
