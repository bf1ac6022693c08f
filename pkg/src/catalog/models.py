from datetime import datetime
from enum import Enum as PythonEnum

from sqlalchemy import Column, DateTime, Enum, Float, ForeignKey, Integer, String, Text, UniqueConstraint
from sqlalchemy.orm import declarative_base, relationship

Base = declarative_base()


class RunStatus(PythonEnum):
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"
    EQUILIBRIUM = "equilibrium"


class Run(Base):
    __tablename__ = "runs"

    id = Column(String(36), primary_key=True)  # UUID as string for SQLite compatibility
    out_dir = Column(String(1024), nullable=False)
    scheme = Column(String(16), nullable=False)
    dt = Column(Float, nullable=False)
    steps = Column(Integer, nullable=False)
    atoms = Column(Integer, nullable=False)
    columns_per_axis = Column(Integer, nullable=False)
    status = Column(Enum(RunStatus), default=RunStatus.RUNNING, nullable=False)
    last_step = Column(Integer, nullable=True)
    message = Column(Text, nullable=True)
    created_at = Column(DateTime(timezone=True), default=datetime.now, nullable=False)
    updated_at = Column(DateTime(timezone=True), default=datetime.now, onupdate=datetime.now, nullable=False)

    snapshots = relationship(
        "SnapshotEntry", back_populates="run", order_by="SnapshotEntry.step", cascade="all, delete-orphan"
    )

    def __repr__(self):
        return f"<Run(id='{self.id}', status='{self.status.value}', steps={self.steps})>"


class SnapshotEntry(Base):
    __tablename__ = "snapshots"
    __table_args__ = (UniqueConstraint("run_id", "step", name="uq_snapshot_run_step"),)

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(String(36), ForeignKey("runs.id"), nullable=False)
    step = Column(Integer, nullable=False)
    time = Column(Float, nullable=False)
    energy = Column(Float, nullable=False)
    dual_value = Column(Float, nullable=False)
    duality_gap = Column(Float, nullable=False)
    residual_norm = Column(Float, nullable=False)
    support_radius = Column(Float, nullable=False)
    solver_iterations = Column(Integer, nullable=False)
    state_file = Column(String(255), nullable=False)
    height_file = Column(String(255), nullable=False)

    run = relationship("Run", back_populates="snapshots")

    def __repr__(self):
        return f"<SnapshotEntry(run_id='{self.run_id}', step={self.step}, time={self.time})>"
